#include <doctest.h>

#include <algorithm>
#include <set>

#include "colsem/cnf.hpp"
#include "colsem/error.hpp"
#include "colsem/eval.hpp"
#include "colsem/expander.hpp"
#include "colsem/harness.hpp"
#include "colsem/sql.hpp"
#include "fixtures.hpp"

using namespace colsem;
using namespace fixtures;

namespace {

Formula where_of(std::string_view text, Dialect d = Dialect::Columnar) {
  return *parse(std::string("SELECT 1 FROM R WHERE ") + std::string(text), d).where;
}

std::set<std::string> conjunct_texts(const Query& q) {
  std::set<std::string> out;
  if (!q.where) return out;
  std::vector<Formula> parts;
  collect_conjuncts(*q.where, parts);
  for (const auto& p : parts) out.insert(print(p));
  return out;
}

std::set<std::string> from_texts(const Query& q) {
  std::set<std::string> out;
  for (const auto& t : q.from) out.insert(t.name + (t.alias ? " AS " + *t.alias : ""));
  return out;
}

bool nnf(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Not: {
      auto k = f.children[0].kind;
      return k == Formula::Kind::Predicate || k == Formula::Kind::Missing || k == Formula::Kind::IsNull;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: return nnf(f.lhs()) && nnf(f.rhs());
    default: return true;
  }
}

void no_null_constructs(const Query& q);

void no_null_constructs(const Formula& f) {
  CHECK(f.kind != Formula::Kind::IsNull);
  CHECK(f.kind != Formula::Kind::Missing);
  if (f.subquery) no_null_constructs(*f.subquery);
  for (const auto& c : f.children) no_null_constructs(c);
}

void no_null_constructs(const Query& q) {
  if (q.where) no_null_constructs(*q.where);
}

// Every attribute binding in FROM must be tied to its key binding.
void correlated(const Query& q) {
  std::set<std::string> conjuncts = conjunct_texts(q);
  std::set<std::string> bindings;
  for (const auto& t : q.from) bindings.insert(t.binding());
  for (const auto& t : q.from) {
    const std::string& b = t.binding();
    if (b.size() >= 3 && b.compare(b.size() - 3, 3, "_id") == 0) continue;
    auto cut = t.name.find('_');
    REQUIRE(cut != std::string::npos);
    std::string attr = t.name.substr(cut + 1);
    std::string key = b.substr(0, b.size() - attr.size() - 1) + "_id";
    INFO(print(q));
    CHECK(bindings.count(key) == 1);
    CHECK(conjuncts.count(key + ".id = " + b + ".id") == 1);
  }
}

std::vector<const Query*> members(const ExpandedQuerySet& set) {
  std::vector<const Query*> out;
  for (const auto& b : set.branches) {
    out.push_back(&b.key);
    for (const auto& m : b.outputs) if (m) out.push_back(&*m);
    for (const auto& g : b.guards) if (g) out.push_back(&*g);
  }
  return out;
}

NormalizedGroup cs(std::string_view text, const Database& db) {
  return run_cs(parse(text, Dialect::Columnar), decompose_db(db));
}

}  // namespace

TEST_SUITE("naming") {
  TEST_CASE("ids and rename") {
    std::vector<TableRef> from{{"R", std::nullopt}, {"S", std::string("s2")}};
    CHECK(ids(from) == std::vector<ColumnRef>{{"R_id", "id"}, {"s2_id", "id"}});
    CHECK(rename(ColumnRef{"s2", "x"}) == ColumnRef{"s2_x", "x"});
    Expression e = Expression::apply(FunctionOp::Add, Expression::column_of("R", "x"),
                                     Expression::constant_of(i(1)));
    CHECK(print(rename(e)) == "R_x.x + 1");
    CHECK(print(rename(AggregateExpression::count_star())) == "COUNT(*)");
    CHECK(print(rename(AggregateExpression::of(AggregateFunc::Sum, Expression::column_of("R", "y")))) ==
          "SUM(R_y.y)");
  }
}

TEST_SUITE("formula rewrites") {
  TEST_CASE("MISSING desugars to a NOT IN over the attribute relation") {
    std::vector<TableRef> from{{"R", std::string("a")}};
    Formula f = desugar_missing(Formula::missing_of("a", "x"), from);
    CHECK(print(f) == "a_id.id NOT IN (SELECT a_x.id FROM R_x AS a_x)");
    Formula g = desugar_missing(Formula::negation(Formula::missing_of("a", "x")), from);
    CHECK(print(g) == "NOT (a_id.id NOT IN (SELECT a_x.id FROM R_x AS a_x))");
  }

  TEST_CASE("2VL simulation of negation") {
    CHECK(print(simulate_2vl_negation(where_of("NOT (R.x = R.x)"))) ==
          "R MISSING x OR NOT (R.x = R.x)");
    CHECK(print(simulate_2vl_negation(where_of("NOT NOT R.x = 1"))) == "R.x = 1");
    CHECK(print(simulate_2vl_negation(where_of("NOT (R.x = 1 AND R.y < R.x)"))) ==
          "R MISSING x OR NOT (R.x = 1) OR (R MISSING y OR R MISSING x OR NOT (R.y < R.x))");
    CHECK(print(simulate_2vl_negation(where_of("R.x = 1"))) == "R.x = 1");
  }

  TEST_CASE("NNF pushes negation through connectives") {
    CHECK(print(to_nnf(where_of("NOT (R.x = 1 OR NOT R.y = 2)"))) == "NOT (R.x = 1) AND R.y = 2");
    CHECK(print(to_nnf(where_of("NOT NOT NOT R MISSING x"))) == "NOT (R MISSING x)");
  }

  TEST_CASE("IS NULL becomes MISSING") {
    Query q = parse("SELECT R.x FROM R WHERE (R.x + R.y) IS NULL OR 1 IS NULL", Dialect::ThreeValued);
    CHECK(print(isnull_to_missing(q)) ==
          "SELECT R.x FROM R WHERE R MISSING x OR R MISSING y OR 1 = 0");
  }

  TEST_CASE("required attributes") {
    auto req = [](std::string_view text) { return required_attributes(to_nnf(where_of(text))); };
    CHECK(req("R.x = 1 AND R.y = 2") == std::vector<ColumnRef>{{"R", "x"}, {"R", "y"}});
    CHECK(req("R.x = 1 OR R.y = 2").empty());
    CHECK(req("(R.x = 1 AND R.y = 2) OR R.x = 3") == std::vector<ColumnRef>{{"R", "x"}});
    CHECK(req("NOT R MISSING y") == std::vector<ColumnRef>{{"R", "y"}});
    CHECK(req("R MISSING y").empty());
  }

  TEST_CASE("NNF output never negates a connective, and keeps 3VL results") {
    GeneratorConfig cfg;
    for (std::uint64_t n = 0; n < 300; ++n) {
      Rng rng(splitmix64(77 + n));
      Database db = gen_instance(cfg, rng);
      Query q = gen_query(cfg, db, rng, {Dialect::ThreeValued, true, true});
      if (!q.where) continue;
      Query r = q;
      r.where = to_nnf(*q.where);
      INFO(print(q));
      CHECK(nnf(*r.where));
      CHECK(same_contents(run_query(q, db, EvalMode::ThreeValued), run_query(r, db, EvalMode::ThreeValued)));
    }
  }
}

TEST_SUITE("expand") {
  TEST_CASE("the Codd query") {
    ExpandedQuerySet set = expand(parse("SELECT Address FROM R WHERE R.Author = \"Codd\"", Dialect::Columnar),
                                  authors_db().catalog());
    REQUIRE(set.branches.size() == 1);
    const auto& b = set.branches[0];
    REQUIRE(b.outputs.size() == 1);
    REQUIRE(b.outputs[0]);
    Query expected = parse(
        "SELECT R_Address.Address FROM R_Author, R_Address, R_id "
        "WHERE R_id.id = R_Author.id AND R_id.id = R_Address.id AND R_Author.Author = \"Codd\"",
        Dialect::Columnar);
    CHECK(from_texts(*b.outputs[0]) == from_texts(expected));
    CHECK(conjunct_texts(*b.outputs[0]) == conjunct_texts(expected));
    CHECK(print(b.key) ==
          "SELECT R_id.id FROM R_id, R_Author WHERE R_id.id = R_Author.id AND R_Author.Author = \"Codd\"");
  }

  TEST_CASE("one member per output column") {
    Catalog c;
    c.add("R", {{"x", ColumnType::Int}, {"y", ColumnType::Int}});
    ExpandedQuerySet set = expand(parse("SELECT R.x, R.y FROM R", Dialect::Columnar), c);
    REQUIRE(set.branches.size() == 1);
    REQUIRE(set.branches[0].outputs.size() == 2);
    CHECK(print(*set.branches[0].outputs[0]) ==
          "SELECT R_id.id, R_x.x AS x FROM R_id, R_x WHERE R_id.id = R_x.id");
    CHECK(print(*set.branches[0].outputs[1]) ==
          "SELECT R_id.id, R_y.y AS y FROM R_id, R_y WHERE R_id.id = R_y.id");
  }

  TEST_CASE("grouping on a column that may be missing branches on its presence") {
    Catalog c;
    c.add("R", {{"x", ColumnType::Int}, {"y", ColumnType::Int}});
    ExpandedQuerySet set = expand(parse("SELECT COUNT(R.y) FROM R GROUP BY R.x", Dialect::Columnar), c);
    CHECK(set.aggregate);
    REQUIRE(set.branches.size() == 2);
    CHECK(set.branches[0].present_group_by.empty());
    CHECK(set.branches[1].present_group_by == std::vector<ColumnRef>{{"R", "x"}});
    CHECK(print(*set.branches[1].outputs[0]) ==
          "SELECT R_x.x, COUNT(R_y.y) AS count_y FROM R_id, R_x, R_y "
          "WHERE R_id.id = R_x.id AND R_id.id = R_y.id GROUP BY R_x.x");
    REQUIRE(set.branches[1].guards[0]);
    ExpandedQuerySet forced =
        expand(parse("SELECT COUNT(*) FROM R WHERE R.x > 0 GROUP BY R.x", Dialect::Columnar), c);
    CHECK(forced.branches.size() == 1);
  }

  TEST_CASE("errors") {
    Catalog c;
    c.add("R", {{"x", ColumnType::Int}});
    auto kind = [&](std::string_view text, Dialect d = Dialect::Columnar) {
      try {
        expand(parse(text, d), c);
      } catch (const Error& e) {
        return e.kind();
      }
      FAIL("expected an error for " << text);
      return ErrorKind::Io;
    };
    CHECK(kind("SELECT 1") == ErrorKind::InvalidQuery);
    CHECK(kind("SELECT R.x FROM R WHERE R.x IS NULL", Dialect::ThreeValued) == ErrorKind::Dialect);
    CHECK(kind("SELECT Q.x FROM Q") == ErrorKind::UnknownTable);
    CHECK(kind("SELECT R.q FROM R") == ErrorKind::UnknownAttribute);
    // An attribute named id collides with the key relation.
    Catalog d;
    d.add("R", {{"x", ColumnType::Int}, {"id", ColumnType::Int}});
    CHECK_THROWS_AS(expand(parse("SELECT R.x FROM R", Dialect::Columnar), d), Error);
    Catalog e;
    e.add("R", {{"x_id", ColumnType::Int}});
    try {
      // a.x_id lives in a_x_id, which is also the key binding of a_x.
      expand(parse("SELECT a.x_id FROM R AS a, R AS a_x", Dialect::Columnar), e);
      FAIL("expected a collision");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::NameCollision);
    }
  }

  TEST_CASE("members are correlated and free of Null tests") {
    GeneratorConfig cfg;
    for (std::uint64_t n = 0; n < 300; ++n) {
      Rng rng(splitmix64(900 + n));
      Database db = gen_instance(cfg, rng);
      Query q = gen_query(cfg, db, rng, {Dialect::Columnar, true, true});
      ExpandedQuerySet set = expand(q, db.catalog());
      for (const Query* m : members(set)) {
        no_null_constructs(*m);
        correlated(*m);
      }
    }
  }
}

TEST_SUITE("compile") {
  TEST_CASE("MISSING becomes IS NULL over the original tables") {
    Query q = compile_to_3vl(parse("SELECT Author FROM R WHERE R MISSING Address", Dialect::Columnar),
                             authors_db().catalog());
    CHECK(print(q) == "SELECT Author FROM R WHERE R.Address IS NULL");
    Query star = compile_to_3vl(parse("SELECT * FROM R WHERE R.x = R.x", Dialect::Columnar),
                                [] { Catalog c; c.add("R", {{"x", ColumnType::Int}}); return c; }());
    CHECK(print(star) == "SELECT * FROM R WHERE R.x = R.x");
  }
}

TEST_SUITE("run_cs") {
  TEST_CASE("the Codd query answers with its address") {
    NormalizedGroup g = cs("SELECT Address FROM R WHERE R.Author = \"Codd\"", authors_db());
    CHECK(g.keys == std::vector<OpaqueId>{1});
    CHECK(g.entries[0] == std::vector<std::pair<OpaqueId, Value>>{{1, s("San Jose")}});
  }

  TEST_CASE("MISSING selects the author without an address") {
    NormalizedGroup g = cs("SELECT Author FROM R WHERE R MISSING Address", authors_db());
    Relation expected = relation("result", {{"Author", ColumnType::Str}}, {{s("Chamberlin")}});
    CHECK(g.keys.size() == 1);
    CHECK(equal_up_to_id_renaming(g, normalize_output(expected)));
  }

  TEST_CASE("a missing cell stays missing in the output") {
    NormalizedGroup g = cs("SELECT Author, Institute FROM R", authors_db());
    Relation expected = relation("result", {{"Author", ColumnType::Str}, {"Institute", ColumnType::Str}},
                                 {{s("Codd"), s("IBM")}, {s("Chamberlin"), s("IBM")}, {s("Boyce"), null()}});
    CHECK(equal_up_to_id_renaming(g, normalize_output(expected)));
  }

  TEST_CASE("grouping puts missing values in one group") {
    NormalizedGroup g = cs("SELECT Institute, COUNT(*) FROM R GROUP BY R.Institute", authors_db());
    Relation expected = relation("result", {{"Institute", ColumnType::Str}, {"count", ColumnType::Int}},
                                 {{s("IBM"), i(2)}, {null(), i(1)}});
    CHECK(equal_up_to_id_renaming(g, normalize_output(expected)));
  }

  TEST_CASE("an aggregate with a missing input is missing") {
    NormalizedGroup g = cs("SELECT Author, COUNT(R.Address) FROM R GROUP BY R.Author", authors_db());
    Relation expected =
        relation("result", {{"Author", ColumnType::Str}, {"count_Address", ColumnType::Int}},
                 {{s("Codd"), i(1)}, {s("Chamberlin"), null()}, {s("Boyce"), i(1)}});
    CHECK(equal_up_to_id_renaming(g, normalize_output(expected)));
  }

  TEST_CASE("empty input without GROUP BY still has one group") {
    Database db;
    db.add(relation("R", {{"x", ColumnType::Int}}, {}));
    NormalizedGroup g = cs("SELECT COUNT(*), SUM(R.x) FROM R", db);
    Relation expected = relation("result", {{"count", ColumnType::Int}, {"sum_x", ColumnType::Int}},
                                 {{i(0), null()}});
    CHECK(equal_up_to_id_renaming(g, normalize_output(expected)));
  }

  TEST_CASE("agrees with the compiled query on generated inputs") {
    GeneratorConfig cfg;
    for (std::uint64_t n = 0; n < 300; ++n) {
      Rng rng(splitmix64(4242 + n));
      Database db = gen_instance(cfg, rng);
      Query q = gen_query(cfg, db, rng, {Dialect::Columnar, true, true});
      INFO(print(q));
      NormalizedGroup g = run_cs(q, decompose_db(db));
      Relation r = run_query(compile_to_3vl(q, db.catalog()), db, EvalMode::ThreeValued);
      CHECK(same_contents(full_outer_join_group(g), r));
    }
  }
}

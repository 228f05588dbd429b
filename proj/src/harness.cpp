#include "colsem/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "colsem/cnf.hpp"
#include "colsem/csv.hpp"
#include "colsem/error.hpp"
#include "colsem/eval.hpp"
#include "colsem/expander.hpp"
#include "colsem/sql.hpp"

namespace colsem {

const std::vector<std::string> string_domain = {"Codd", "Chamberlin", "Boyce"};

void GeneratorConfig::validate() const {
  if (max_tables < 1 || max_columns < 1 || max_rows < 1 || max_formula_depth < 1) {
    throw Error(ErrorKind::InvalidQuery, "generator bounds must be at least 1");
  }
  if (!(null_probability >= 0.0 && null_probability <= 1.0)) {
    throw Error(ErrorKind::InvalidQuery, "null probability must lie in [0, 1]");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

bool Rng::chance(double p) {
  constexpr std::uint64_t scale = std::uint64_t{1} << 53;
  return static_cast<double>(engine_() >> 11) < p * static_cast<double>(scale);
}

namespace {

std::string table_name(int i) {
  static const char* names[] = {"R", "S", "T", "U", "V", "W"};
  return i < 6 ? names[i] : "R" + std::to_string(i);
}

std::string column_name(int i) {
  static const char* names[] = {"x", "y", "z", "w"};
  return i < 4 ? names[i] : "c" + std::to_string(i + 1);
}

Value random_value(ColumnType type, Rng& rng) {
  if (type == ColumnType::Int) return Value::integer(rng.range(0, 4));
  return Value::string(rng.pick(string_domain));
}

struct Scope {
  std::vector<std::pair<ColumnRef, ColumnType>> columns;

  std::vector<ColumnRef> of_type(ColumnType t) const {
    std::vector<ColumnRef> out;
    for (const auto& [ref, type] : columns) {
      if (type == t) out.push_back(ref);
    }
    return out;
  }
};

class QueryGenerator {
 public:
  QueryGenerator(const GeneratorConfig& cfg, const Database& db, Rng& rng, const QueryOptions& opt)
      : cfg_(cfg), db_(db), rng_(rng), opt_(opt) {}

  Query run() {
    Query q;
    std::vector<std::string> names;
    for (const auto& [name, rel] : db_.relations) names.push_back(name);
    int entries = rng_.range(1, std::min(cfg_.max_tables, 3));
    int aliases = 0;
    for (int i = 0; i < entries; ++i) {
      TableRef t{rng_.pick(names), std::nullopt};
      bool taken = std::any_of(q.from.begin(), q.from.end(),
                               [&](const TableRef& o) { return o.binding() == t.name; });
      if (taken || rng_.chance(0.15)) t.alias = "a" + std::to_string(++aliases);
      for (const auto& c : db_.at(t.name).columns()) {
        scope_.columns.push_back({{t.binding(), c.name}, c.type});
      }
      q.from.push_back(std::move(t));
    }
    if (opt_.aggregates && rng_.chance(0.35)) {
      aggregate_select(q);
    } else if (rng_.chance(0.1)) {
      q.star = true;
    } else {
      int n = rng_.range(1, 3);
      for (int i = 0; i < n; ++i) {
        Expression e = rng_.chance(0.6) ? Expression::column_of(rng_.pick(scope_.columns).first)
                                        : expr(random_type(), 2);
        q.select_exprs.push_back({std::move(e), alias()});
      }
    }
    if (rng_.chance(0.8)) q.where = formula(0);
    return q;
  }

 private:
  std::optional<std::string> alias() {
    if (!rng_.chance(0.1)) return std::nullopt;
    return "o" + std::to_string(++outputs_);
  }

  ColumnType random_type() { return rng_.pick(scope_.columns).second; }

  Expression constant(ColumnType t) { return Expression::constant_of(random_value(t, rng_)); }

  Expression expr(ColumnType t, int depth) {
    std::vector<ColumnRef> cols = scope_.of_type(t);
    std::uint64_t roll = rng_.below(10);
    if (depth > 0 && roll < 3) {
      if (t == ColumnType::Str) {
        return Expression::apply(FunctionOp::Concat, expr(t, depth - 1), expr(t, depth - 1));
      }
      static const FunctionOp ops[] = {FunctionOp::Add, FunctionOp::Sub, FunctionOp::Mul,
                                       FunctionOp::Div};
      FunctionOp op = ops[rng_.below(4)];
      if (op == FunctionOp::Div) {
        return Expression::apply(op, expr(t, depth - 1),
                                 Expression::constant_of(Value::integer(rng_.range(1, 4))));
      }
      return Expression::apply(op, expr(t, depth - 1), expr(t, depth - 1));
    }
    if (!cols.empty() && roll < 8) return Expression::column_of(rng_.pick(cols));
    return constant(t);
  }

  Formula leaf() {
    if (opt_.null_tests && rng_.chance(0.2)) {
      if (opt_.dialect == Dialect::Columnar) {
        const ColumnRef& c = rng_.pick(scope_.columns).first;
        return Formula::missing_of(c.table, c.attribute);
      }
      return Formula::is_null(expr(random_type(), 1));
    }
    static const CompareOp ops[] = {CompareOp::Eq, CompareOp::Ne, CompareOp::Lt,
                                    CompareOp::Le, CompareOp::Gt, CompareOp::Ge};
    ColumnType t = random_type();
    Expression lhs = rng_.chance(0.7) ? Expression::column_of(rng_.pick(scope_.of_type(t)))
                                      : expr(t, 2);
    Expression rhs = rng_.chance(0.5) ? constant(t) : expr(t, 1);
    return Formula::predicate(ops[rng_.below(6)], std::move(lhs), std::move(rhs));
  }

  Formula formula(int depth) {
    double stop = 0.35 + 0.15 * depth;
    if (depth >= cfg_.max_formula_depth - 1 || rng_.chance(stop)) {
      Formula f = leaf();
      return rng_.chance(0.15) ? Formula::negation(std::move(f)) : f;
    }
    std::uint64_t roll = rng_.below(20);
    if (roll < 7) return Formula::conj(formula(depth + 1), formula(depth + 1));
    if (roll < 14) return Formula::disj(formula(depth + 1), formula(depth + 1));
    return Formula::negation(formula(depth + 1));
  }

  void aggregate_select(Query& q) {
    int groups = rng_.range(0, 2);
    for (int i = 0; i < groups; ++i) {
      const ColumnRef& c = rng_.pick(scope_.columns).first;
      if (std::find(q.group_by.begin(), q.group_by.end(), c) == q.group_by.end()) {
        q.group_by.push_back(c);
      }
    }
    for (const auto& g : q.group_by) {
      if (!rng_.chance(0.7)) continue;
      Expression e = Expression::column_of(g);
      if (type_of(g) == ColumnType::Int && rng_.chance(0.2)) {
        e = Expression::apply(FunctionOp::Add, std::move(e), constant(ColumnType::Int));
      }
      q.select_exprs.push_back({std::move(e), alias()});
    }
    if (q.group_by.empty() && rng_.chance(0.1)) {
      q.select_exprs.push_back({constant(ColumnType::Int), alias()});
    }
    int aggs = rng_.range(1, 2);
    bool has_int = !scope_.of_type(ColumnType::Int).empty();
    for (int i = 0; i < aggs; ++i) {
      std::uint64_t roll = rng_.below(6);
      AggregateExpression a;
      if (roll == 0) {
        a = AggregateExpression::count_star();
      } else if (roll == 1) {
        a = AggregateExpression::of(AggregateFunc::Count, expr(random_type(), 1));
      } else if (roll == 2 || roll == 3) {
        a = AggregateExpression::of(roll == 2 ? AggregateFunc::Sum : AggregateFunc::Avg,
                                    expr(ColumnType::Int, has_int ? 1 : 0));
      } else {
        a = AggregateExpression::of(roll == 4 ? AggregateFunc::Min : AggregateFunc::Max,
                                    expr(random_type(), 1));
      }
      q.select_aggs.push_back({std::move(a), alias()});
    }
  }

  ColumnType type_of(const ColumnRef& r) const {
    for (const auto& [ref, type] : scope_.columns) {
      if (ref == r) return type;
    }
    return ColumnType::Int;
  }

  const GeneratorConfig& cfg_;
  const Database& db_;
  Rng& rng_;
  const QueryOptions& opt_;
  Scope scope_;
  int outputs_ = 0;
};

void count_expr(const Expression& e, Coverage& c) {
  switch (e.kind) {
    case Expression::Kind::Constant: ++c["constant"]; break;
    case Expression::Kind::Column: ++c["column"]; break;
    case Expression::Kind::Function: ++c["function " + std::string(symbol(e.op))]; break;
  }
  for (const auto& a : e.args) count_expr(a, c);
}

void count_formula(const Formula& f, Coverage& c) {
  switch (f.kind) {
    case Formula::Kind::Predicate: ++c["predicate " + std::string(symbol(f.op))]; break;
    case Formula::Kind::IsNull: ++c["is-null"]; break;
    case Formula::Kind::Missing: ++c["missing"]; break;
    case Formula::Kind::Membership: ++c[f.negated ? "not-in" : "in"]; break;
    case Formula::Kind::And: ++c["and"]; break;
    case Formula::Kind::Or: ++c["or"]; break;
    case Formula::Kind::Not: ++c["not"]; break;
  }
  for (const auto& e : f.operands) count_expr(e, c);
  for (const auto& ch : f.children) count_formula(ch, c);
  if (f.subquery) count_nodes(*f.subquery, c);
}

}  // namespace

Database gen_instance(const GeneratorConfig& cfg, Rng& rng) {
  cfg.validate();
  Database db;
  int tables = rng.range(1, cfg.max_tables);
  for (int t = 0; t < tables; ++t) {
    Schema schema;
    int columns = rng.range(1, cfg.max_columns);
    for (int c = 0; c < columns; ++c) {
      schema.push_back({column_name(c), rng.chance(0.6) ? ColumnType::Int : ColumnType::Str});
    }
    Relation r(table_name(t), schema);
    int rows = rng.range(0, cfg.max_rows);
    for (int i = 0; i < rows; ++i) {
      Row row;
      for (const auto& c : schema) {
        row.push_back(rng.chance(cfg.null_probability) ? Value::null() : random_value(c.type, rng));
      }
      r.add_row(std::move(row));
    }
    db.add(std::move(r));
  }
  return db;
}

Database gen_instance(const GeneratorConfig& cfg) {
  Rng rng(splitmix64(cfg.seed));
  return gen_instance(cfg, rng);
}

Query gen_query(const GeneratorConfig& cfg, const Database& db, Rng& rng, const QueryOptions& opt) {
  cfg.validate();
  if (db.relations.empty()) throw Error(ErrorKind::InvalidQuery, "cannot generate a query over an empty database");
  return QueryGenerator(cfg, db, rng, opt).run();
}

Query gen_query(const GeneratorConfig& cfg, const Database& db, const QueryOptions& opt) {
  Rng rng(splitmix64(cfg.seed ^ 0x5bd1e995ULL));
  return gen_query(cfg, db, rng, opt);
}

void count_nodes(const Query& q, Coverage& c) {
  ++c["query"];
  if (q.star) ++c["star"];
  for (const auto& s : q.select_exprs) {
    if (s.alias) ++c["output alias"];
    count_expr(s.expr, c);
  }
  for (const auto& a : q.select_aggs) {
    if (a.alias) ++c["output alias"];
    ++c["aggregate " + std::string(to_string(a.agg.func)) + (a.agg.star ? "(*)" : "")];
    if (a.agg.arg) count_expr(*a.agg.arg, c);
  }
  for (const auto& t : q.from) ++c[t.alias ? "table alias" : "table"];
  if (q.where) {
    ++c["where"];
    count_formula(*q.where, c);
  }
  if (!q.group_by.empty()) ++c["group-by"];
  c["group-by column"] += q.group_by.size();
}

std::vector<std::string> expected_node_kinds(Dialect dialect) {
  std::vector<std::string> kinds = {
      "query", "star", "output alias", "constant", "column", "function +", "function -",
      "function *", "function /", "function ||", "aggregate COUNT(*)", "aggregate COUNT",
      "aggregate SUM", "aggregate MIN", "aggregate MAX", "aggregate AVG", "table",
      "table alias", "where", "predicate =", "predicate <>", "predicate <", "predicate <=",
      "predicate >", "predicate >=", "and", "or", "not", "group-by", "group-by column"};
  kinds.push_back(dialect == Dialect::Columnar ? "missing" : "is-null");
  return kinds;
}

std::string_view to_string(Property p) {
  switch (p) {
    case Property::Prop51: return "51";
    case Property::Prop52: return "52";
    case Property::NullFree: return "nullfree";
    case Property::Simulate2vl: return "2vl";
    case Property::Size: return "size";
  }
  return "?";
}

std::optional<Property> parse_property(std::string_view text) {
  for (Property p : all_properties()) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

const std::vector<Property>& all_properties() {
  static const std::vector<Property> all = {Property::Prop51, Property::Prop52, Property::NullFree,
                                            Property::Simulate2vl, Property::Size};
  return all;
}

QueryOptions query_options(Property p) {
  switch (p) {
    case Property::Prop52:
    case Property::Size: return {Dialect::Columnar, true, true};
    case Property::NullFree: return {Dialect::ThreeValued, false, true};
    default: return {Dialect::ThreeValued, true, true};
  }
}

GeneratorConfig trial_config(Property p, GeneratorConfig cfg) {
  if (p == Property::NullFree) cfg.null_probability = 0.0;
  return cfg;
}

namespace {

TrialOutcome failure(const Database& db, const Query& q, Dialect d, std::string message,
                     std::vector<std::pair<std::string, Relation>> outputs = {},
                     std::optional<Row> diff = std::nullopt) {
  TrialOutcome out;
  out.pass = false;
  CounterExample c;
  c.db = db;
  c.query = q;
  c.dialect = d;
  c.message = std::move(message);
  c.outputs = std::move(outputs);
  c.first_difference = std::move(diff);
  out.counterexample = std::move(c);
  return out;
}

TrialOutcome compare(const Database& db, const Query& q, Dialect d, const std::string& what,
                     std::vector<std::pair<std::string, Relation>> outputs) {
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    const Relation& a = outputs[0].second;
    const Relation& b = outputs[i].second;
    if (a.columns() != b.columns()) {
      return failure(db, q, d, what + ": output schemas of " + outputs[0].first + " and " +
                                   outputs[i].first + " differ", std::move(outputs));
    }
    if (!same_contents(a, b)) {
      auto diff = first_differing_row(a, b);
      return failure(db, q, d, what + ": " + outputs[0].first + " and " + outputs[i].first +
                                   " differ at row " + format_row(*diff),
                     std::move(outputs), diff);
    }
  }
  return {};
}

template <typename F>
TrialOutcome guarded(const Database& db, const Query& q, Dialect d, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return failure(db, q, d, std::string("error: ") + e.what());
  }
}

}  // namespace

TrialOutcome check_prop_51(const Database& db, const Query& q) {
  return guarded(db, q, Dialect::ThreeValued, [&] {
    Query q_cs = isnull_to_missing(q);
    Relation classic = run_query(q, db, EvalMode::ThreeValued);
    Relation columnar = full_outer_join_group(run_cs(q_cs, decompose_db(db)));
    return compare(db, q, Dialect::ThreeValued, "left square",
                   {{"3vl", classic}, {"cs", columnar}});
  });
}

TrialOutcome check_prop_52(const Database& db, const Query& q) {
  return guarded(db, q, Dialect::Columnar, [&] {
    NormalizedDatabase ndb = decompose_db(db);
    NormalizedGroup direct = run_cs(q, ndb);
    Query compiled = compile_to_3vl(q, db.catalog());
    NormalizedGroup via =
        normalize_output(run_query(compiled, full_outer_join_db(ndb), EvalMode::ThreeValued));
    if (equal_up_to_id_renaming(direct, via)) return TrialOutcome{};
    Relation a = full_outer_join_group(direct);
    Relation b = full_outer_join_group(via);
    auto diff = first_differing_row(a, b);
    return failure(db, q, Dialect::Columnar,
                   "right square: groups differ" +
                       (diff ? " at row " + format_row(*diff) : std::string(" in schema")),
                   {{"cs", a}, {"compiled_3vl", b}}, diff);
  });
}

TrialOutcome check_null_free(const Database& db, const Query& q) {
  return guarded(db, q, Dialect::ThreeValued, [&] {
    return compare(db, q, Dialect::ThreeValued, "null-free agreement",
                   {{"3vl", run_query(q, db, EvalMode::ThreeValued)},
                    {"2vl", run_query(q, db, EvalMode::TwoValued)},
                    {"cs", full_outer_join_group(run_cs(q, decompose_db(db)))}});
  });
}

TrialOutcome check_simulate_2vl(const Database& db, const Query& q) {
  return guarded(db, q, Dialect::ThreeValued, [&] {
    Query q_cs = simulate_2vl(isnull_to_missing(q));
    return compare(db, q, Dialect::ThreeValued, "2-valued simulation",
                   {{"2vl", run_query(q, db, EvalMode::TwoValued)},
                    {"cs_simulated", full_outer_join_group(run_cs(q_cs, decompose_db(db)))}});
  });
}

TrialOutcome check_linear_size(const Database& db, const Query& q) {
  return guarded(db, q, Dialect::Columnar, [&] {
    std::size_t source = node_count(q);
    // Plain compilation and compilation after the 2VL negation rewrite.
    std::size_t compiled = std::max(node_count(compile_to_3vl(q, db.catalog())),
                                    node_count(compile_to_3vl(simulate_2vl(q), db.catalog())));
    double ratio = static_cast<double>(compiled) / static_cast<double>(source);
    TrialOutcome out;
    if (compiled > 4 * source + 8) {
      out = failure(db, q, Dialect::Columnar,
                    "compiled size " + std::to_string(compiled) + " exceeds 4*" +
                        std::to_string(source) + "+8");
    }
    out.size_ratio = ratio;
    return out;
  });
}

TrialOutcome run_trial(Property p, const GeneratorConfig& base, std::uint64_t index) {
  GeneratorConfig cfg = trial_config(p, base);
  std::uint64_t seed = splitmix64(cfg.seed + index);
  Rng rng(seed);
  Database db = gen_instance(cfg, rng);
  Query q = gen_query(cfg, db, rng, query_options(p));
  TrialOutcome out;
  switch (p) {
    case Property::Prop51: out = check_prop_51(db, q); break;
    case Property::Prop52: out = check_prop_52(db, q); break;
    case Property::NullFree: out = check_null_free(db, q); break;
    case Property::Simulate2vl: out = check_simulate_2vl(db, q); break;
    case Property::Size: out = check_linear_size(db, q); break;
  }
  if (out.counterexample) {
    out.counterexample->property = p;
    out.counterexample->trial = index;
    out.counterexample->seed = seed;
    out.counterexample->config = base;
  }
  return out;
}

PropertyReport run_trials(Property p, const GeneratorConfig& cfg, std::uint64_t trials,
                          unsigned jobs) {
  cfg.validate();
  std::vector<TrialOutcome> outcomes(trials);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next++; i < trials; i = next++) outcomes[i] = run_trial(p, cfg, i);
  };
  jobs = std::max(1U, jobs);
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  PropertyReport report;
  report.property = p;
  report.trials = trials;
  for (auto& o : outcomes) {
    report.max_ratio = std::max(report.max_ratio, o.size_ratio);
    if (!o.pass) {
      ++report.failures;
      report.counterexamples.push_back(std::move(*o.counterexample));
    }
  }
  return report;
}

std::string format_report(const PropertyReport& r) {
  std::ostringstream os;
  os << "property " << to_string(r.property) << ": " << r.trials << " trials, " << r.failures
     << " counterexamples";
  if (r.property == Property::Size) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.max_ratio);
    os << ", max size ratio " << buf;
  }
  os << '\n';
  for (const auto& c : r.counterexamples) {
    os << "  trial " << c.trial << " (seed " << c.seed << "): " << c.message << '\n';
    os << "    query: " << print(c.query) << '\n';
  }
  return os.str();
}

void write_counterexample(const CounterExample& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "db");
  emit_database(c.db, dir / "db");
  {
    std::ofstream sql(dir / "query.sql");
    sql << print(c.query) << ";\n";
  }
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [label, rel] : c.outputs) {
    std::string file = "output_" + label + ".csv";
    emit_csv(rel, dir / file);
    outputs.push_back(file);
  }
  nlohmann::json manifest = {
      {"property", std::string(to_string(c.property))},
      {"trial", c.trial},
      {"trial_seed", c.seed},
      {"dialect", c.dialect == Dialect::Columnar ? "cs" : "3vl"},
      {"query", print(c.query)},
      {"message", c.message},
      {"first_difference", c.first_difference ? format_row(*c.first_difference) : ""},
      {"outputs", outputs},
      {"config",
       {{"max_tables", c.config.max_tables},
        {"max_columns", c.config.max_columns},
        {"max_rows", c.config.max_rows},
        {"null_probability", c.config.null_probability},
        {"max_formula_depth", c.config.max_formula_depth},
        {"seed", c.config.seed}}},
  };
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / "manifest.json").string());
}

TrialOutcome replay_counterexample(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorKind::Io, "cannot read " + (dir / "manifest.json").string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
    GeneratorConfig cfg;
    const auto& c = m.at("config");
    cfg.max_tables = c.at("max_tables").get<int>();
    cfg.max_columns = c.at("max_columns").get<int>();
    cfg.max_rows = c.at("max_rows").get<int>();
    cfg.null_probability = c.at("null_probability").get<double>();
    cfg.max_formula_depth = c.at("max_formula_depth").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    auto p = parse_property(m.at("property").get<std::string>());
    if (!p) throw Error(ErrorKind::InvalidQuery, "unknown property in manifest");
    return run_trial(*p, cfg, m.at("trial").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace colsem

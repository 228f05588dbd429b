#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "colsem/csv.hpp"
#include "colsem/eval.hpp"
#include "colsem/harness.hpp"
#include "colsem/sql.hpp"
#include "fixtures.hpp"

using namespace colsem;
using namespace fixtures;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("colsem_test_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_db(const Database& a, const Database& b) {
  if (a.relations.size() != b.relations.size()) return false;
  for (const auto& [name, rel] : a.relations) {
    if (!b.relations.count(name) || b.at(name).rows() != rel.rows()) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("generators") {
  TEST_CASE("deterministic per seed") {
    GeneratorConfig cfg;
    Database a = gen_instance(cfg);
    Database b = gen_instance(cfg);
    CHECK(same_db(a, b));
    CHECK(print(gen_query(cfg, a)) == print(gen_query(cfg, b)));
    GeneratorConfig other = cfg;
    other.seed = 2;
    CHECK_FALSE((same_db(a, gen_instance(other)) && print(gen_query(cfg, a)) == print(gen_query(other, a))));
  }

  TEST_CASE("known splitmix64 outputs") {
    // Reference values of the splitmix64 finalizer starting from state 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
  }

  TEST_CASE("null probability 0 gives a null-free database") {
    GeneratorConfig cfg;
    cfg.null_probability = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      cfg.seed = seed;
      Database db = gen_instance(cfg);
      for (const auto& [name, rel] : db.relations) {
        for (const auto& row : rel.rows()) {
          for (const auto& v : row) CHECK_FALSE(v.is_null());
        }
      }
    }
  }

  TEST_CASE("bounds are respected and validated") {
    GeneratorConfig cfg;
    cfg.max_tables = 2;
    cfg.max_columns = 2;
    cfg.max_rows = 3;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      cfg.seed = seed;
      Database db = gen_instance(cfg);
      CHECK(db.relations.size() <= 2);
      for (const auto& [name, rel] : db.relations) {
        CHECK(rel.columns().size() <= 2);
        CHECK(rel.rows().size() <= 3);
      }
    }
    GeneratorConfig bad;
    bad.max_rows = 0;
    CHECK_THROWS(bad.validate());
    bad = GeneratorConfig{};
    bad.null_probability = 1.5;
    CHECK_THROWS(bad.validate());
  }

  TEST_CASE("corpora cover every node kind at least 20 times and bind") {
    for (Dialect d : {Dialect::ThreeValued, Dialect::Columnar}) {
      GeneratorConfig cfg;
      Coverage coverage;
      for (std::uint64_t n = 0; n < 1000; ++n) {
        Rng rng(splitmix64(n));
        Database db = gen_instance(cfg, rng);
        Query q = gen_query(cfg, db, rng, {d, true, true});
        REQUIRE_NOTHROW(bind(q, db.catalog()));
        count_nodes(q, coverage);
      }
      for (const auto& kind : expected_node_kinds(d)) {
        INFO(kind);
        CHECK(coverage[kind] >= 20);
      }
    }
  }
}

TEST_SUITE("checks") {
  TEST_CASE("the Codd query commutes in both squares") {
    Query q3 = parse("SELECT Address FROM R WHERE R.Author = \"Codd\"", Dialect::ThreeValued);
    CHECK(check_prop_51(authors_db(), q3).pass);
    Query qc = parse("SELECT Address FROM R WHERE R.Author = \"Codd\"", Dialect::Columnar);
    CHECK(check_prop_52(authors_db(), qc).pass);
  }

  TEST_CASE("SELECT * reproduces the table") {
    CHECK(check_prop_52(authors_db(), parse("SELECT * FROM R", Dialect::Columnar)).pass);
    CHECK(check_prop_51(authors_db(), parse("SELECT * FROM R", Dialect::ThreeValued)).pass);
  }

  TEST_CASE("Null tests translate") {
    CHECK(check_prop_51(authors_db(), parse("SELECT Author FROM R WHERE R.Address IS NULL OR NOT (R.Institute IS NULL)",
                                            Dialect::ThreeValued)).pass);
    CHECK(check_prop_52(authors_db(), parse("SELECT Author, COUNT(*) FROM R WHERE R MISSING Institute GROUP BY R.Author",
                                            Dialect::Columnar)).pass);
    CHECK(check_simulate_2vl(one_and_null(), parse("SELECT * FROM R WHERE NOT (R.x = R.x)", Dialect::ThreeValued)).pass);
  }

  TEST_CASE("size ratio") {
    TrialOutcome o = check_linear_size(authors_db(), parse("SELECT Author FROM R WHERE R.Author = \"Codd\"",
                                                           Dialect::Columnar));
    CHECK(o.pass);
    CHECK(o.size_ratio == doctest::Approx(1.0));
    Catalog c;
    c.add("R", {{"x", ColumnType::Int}, {"y", ColumnType::Int}});
    Database db;
    db.add(relation("R", c.relations.at("R"), {}));
    TrialOutcome deep = check_linear_size(
        db, parse("SELECT R.x FROM R WHERE NOT (R.x = R.y AND NOT (R.x < 1 OR NOT (R.y + R.x > 3 OR R MISSING x)))",
                  Dialect::Columnar));
    CHECK(deep.pass);
    CHECK(deep.size_ratio > 1.0);
    CHECK(deep.size_ratio <= 4.0);
  }

  TEST_CASE("evaluation errors are reported as counterexamples") {
    Database db;
    db.add(relation("R", {{"x", ColumnType::Int}}, {{i(0)}}));
    TrialOutcome o = check_prop_51(db, parse("SELECT 1 / R.x FROM R", Dialect::ThreeValued));
    CHECK_FALSE(o.pass);
    REQUIRE(o.counterexample);
    CHECK(o.counterexample->message.find("division") != std::string::npos);
  }

  TEST_CASE("small runs of every property pass") {
    GeneratorConfig cfg;
    for (Property p : all_properties()) {
      PropertyReport r = run_trials(p, cfg, 200, 2);
      INFO(to_string(p));
      CHECK(r.trials == 200);
      CHECK(r.failures == 0);
    }
  }

  TEST_CASE("reports do not depend on the number of workers") {
    GeneratorConfig cfg;
    cfg.seed = 99;
    for (Property p : {Property::Prop52, Property::Size}) {
      std::string one = format_report(run_trials(p, cfg, 150, 1));
      std::string four = format_report(run_trials(p, cfg, 150, 4));
      CHECK(one == four);
    }
    CHECK(format_report(run_trials(Property::Size, cfg, 10, 1)).rfind("property size: 10 trials, 0 counterexamples, max size ratio ", 0) == 0);
  }

  TEST_CASE("property names") {
    for (Property p : all_properties()) CHECK(parse_property(to_string(p)) == p);
    CHECK_FALSE(parse_property("53"));
  }
}

TEST_SUITE("counterexamples") {
  TEST_CASE("written files describe the trial and replay regenerates it") {
    GeneratorConfig cfg;
    cfg.seed = 17;
    const std::uint64_t trial = 5;
    Property p = Property::Prop51;
    GeneratorConfig tc = trial_config(p, cfg);
    Rng rng(splitmix64(tc.seed + trial));
    CounterExample c;
    c.property = p;
    c.trial = trial;
    c.seed = splitmix64(tc.seed + trial);
    c.config = cfg;
    c.db = gen_instance(tc, rng);
    c.query = gen_query(tc, c.db, rng, query_options(p));
    c.outputs.push_back({"3vl", run_query(c.query, c.db, EvalMode::ThreeValued)});
    c.message = "synthetic";

    auto dir = scratch_dir("replay");
    write_counterexample(c, dir);
    CHECK(std::filesystem::exists(dir / "query.sql"));
    CHECK(std::filesystem::exists(dir / "output_3vl.csv"));
    CHECK(std::filesystem::exists(dir / "db" / "catalog.txt"));
    Database back = load_database(load_catalog(dir / "db" / "catalog.txt"), dir / "db", {});
    CHECK(same_db(back, c.db));
    std::string sql = slurp(dir / "query.sql");
    CHECK(sql == print(c.query) + ";\n");

    auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["property"] == "51");
    CHECK(manifest["trial"] == trial);
    CHECK(manifest["config"]["seed"] == 17);

    // The trial itself passes, so its replay passes as well.
    CHECK(run_trial(p, cfg, trial).pass);
    CHECK(replay_counterexample(dir).pass);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("replay of a missing directory is an error") {
    CHECK_THROWS(replay_counterexample(scratch_dir("absent")));
  }
}

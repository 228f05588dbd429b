#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "colsem/ast.hpp"
#include "colsem/relation.hpp"

namespace colsem {

struct GeneratorConfig {
  int max_tables = 3;
  int max_columns = 4;
  int max_rows = 8;
  double null_probability = 0.3;
  int max_formula_depth = 4;
  std::uint64_t seed = 1;

  /// Throws InvalidQuery when a bound is below 1 or the probability is
  /// outside [0, 1].
  void validate() const;
};

/// Small integers 0..4 and these three strings.
extern const std::vector<std::string> string_domain;

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic across platforms: only raw mt19937_64 output is used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool chance(double p);
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

 private:
  std::mt19937_64 engine_;
};

struct QueryOptions {
  Dialect dialect = Dialect::ThreeValued;
  /// IS NULL (3-valued) or MISSING (columnar) leaves.
  bool null_tests = true;
  bool aggregates = true;
};

/// Tables R, S, T, ... with 1..max_columns int/str columns and 0..max_rows rows.
Database gen_instance(const GeneratorConfig& cfg, Rng& rng);
Database gen_instance(const GeneratorConfig& cfg);
/// A query that binds against db's catalog.
Query gen_query(const GeneratorConfig& cfg, const Database& db, Rng& rng, const QueryOptions& opt);
Query gen_query(const GeneratorConfig& cfg, const Database& db, const QueryOptions& opt = {});

/// Occurrences of each node kind ("and", "predicate <", "aggregate SUM", ...).
using Coverage = std::map<std::string, std::size_t>;
void count_nodes(const Query& q, Coverage& coverage);
/// Node kinds a generated corpus in the given dialect is expected to cover.
std::vector<std::string> expected_node_kinds(Dialect dialect);

enum class Property { Prop51, Prop52, NullFree, Simulate2vl, Size };

std::string_view to_string(Property p);
std::optional<Property> parse_property(std::string_view text);
const std::vector<Property>& all_properties();

/// Generator settings a property uses for its trials.
QueryOptions query_options(Property p);
GeneratorConfig trial_config(Property p, GeneratorConfig cfg);

struct CounterExample {
  Property property = Property::Prop51;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;  // the trial's own seed
  GeneratorConfig config;
  Database db;
  Query query;
  Dialect dialect = Dialect::ThreeValued;
  std::vector<std::pair<std::string, Relation>> outputs;
  std::optional<Row> first_difference;
  std::string message;
};

struct TrialOutcome {
  bool pass = true;
  double size_ratio = 0;  // Size only
  std::optional<CounterExample> counterexample;
};

/// Left square: the query with IS NULL turned into MISSING, run over the
/// decomposed database and recomposed, equals the 3-valued result.
TrialOutcome check_prop_51(const Database& db, const Query& q_3vl);
/// Right square: direct columnar evaluation equals the compiled query run
/// under 3-valued logic on the recomposed database, normalized, up to ids.
TrialOutcome check_prop_52(const Database& db, const Query& q_cs);
/// On null-free data, 3-valued, 2-valued and columnar results coincide.
TrialOutcome check_null_free(const Database& db, const Query& q_3vl);
/// The simulate-2vl rewrite under columnar semantics equals 2-valued results.
TrialOutcome check_simulate_2vl(const Database& db, const Query& q_3vl);
/// node_count(compile_to_3vl(q)) <= 4 * node_count(q) + 8, with and without
/// simulate_2vl applied first. The ratio reported is the larger of the two.
TrialOutcome check_linear_size(const Database& db, const Query& q_cs);

/// Generates trial `index` of a run and checks it. Trial seeds are
/// splitmix64(cfg.seed + index).
TrialOutcome run_trial(Property p, const GeneratorConfig& cfg, std::uint64_t index);

struct PropertyReport {
  Property property = Property::Prop51;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double max_ratio = 0;
  std::vector<CounterExample> counterexamples;  // in trial order
};

/// Runs trials [0, trials) on `jobs` worker threads; results are merged in
/// trial order so the report does not depend on scheduling.
PropertyReport run_trials(Property p, const GeneratorConfig& cfg, std::uint64_t trials,
                          unsigned jobs = 1);

std::string format_report(const PropertyReport& r);

/// Writes db CSVs, catalog.txt, query.sql, one CSV per output and
/// manifest.json into dir.
void write_counterexample(const CounterExample& c, const std::filesystem::path& dir);

/// Regenerates the trial named by a manifest and rechecks it.
TrialOutcome replay_counterexample(const std::filesystem::path& dir);

}  // namespace colsem

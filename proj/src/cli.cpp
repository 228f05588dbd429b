#include "colsem/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "colsem/cnf.hpp"
#include "colsem/csv.hpp"
#include "colsem/error.hpp"
#include "colsem/eval.hpp"
#include "colsem/expander.hpp"
#include "colsem/harness.hpp"
#include "colsem/sql.hpp"

namespace colsem::cli {
namespace {

constexpr int exit_usage = 1;
constexpr int exit_input = 2;
constexpr int exit_counterexample = 3;

struct SqlSource {
  std::string text;
  std::string file;

  std::string read() const {
    if (!text.empty()) return text;
    if (!file.empty()) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw Error(ErrorKind::Io, "cannot read " + file);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
};

void add_sql(CLI::App* cmd, SqlSource& sql) {
  cmd->add_option("sql", sql.text, "SQL statement (read from --file or stdin when omitted)");
  cmd->add_option("-f,--file", sql.file, "file holding the SQL statement");
}

CsvOptions csv_options(const std::optional<std::string>& token) { return CsvOptions{token}; }

void write_relation(const Relation& r, std::ostream& out, const std::string& out_dir,
                    const std::string& file, const CsvOptions& options) {
  if (out_dir.empty()) {
    write_csv(out, r, options);
  } else {
    std::filesystem::create_directories(out_dir);
    emit_csv(r, std::filesystem::path(out_dir) / file, options);
  }
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Columnar semantics toolkit: decompose, expand, compile, run and check SQL queries"};
  app.require_subcommand(1);

  std::string catalog_path, data_dir, out_dir;
  std::optional<std::string> null_token;
  SqlSource sql;
  bool simulate = false, ast = false, normalized = false;
  std::string mode = "3vl";

  auto* decompose_cmd = app.add_subcommand("decompose", "write the Column Normal Form of a database");
  decompose_cmd->add_option("--catalog", catalog_path, "catalog file")->required();
  decompose_cmd->add_option("--data", data_dir, "directory of <relation>.csv files")->required();
  decompose_cmd->add_option("--out", out_dir, "output directory")->required();
  decompose_cmd->add_option("--null-token", null_token, "CSV token for Null");

  auto* expand_cmd = app.add_subcommand("expand", "print the expanded queries of a columnar query");
  expand_cmd->add_option("--catalog", catalog_path, "catalog file")->required();
  expand_cmd->add_flag("--simulate-2vl", simulate, "rewrite negated predicates first");
  expand_cmd->add_flag("--ast", ast, "print AST dumps instead of SQL");
  add_sql(expand_cmd, sql);

  auto* compile_cmd = app.add_subcommand("compile", "compile a columnar query to standard SQL");
  compile_cmd->add_option("--catalog", catalog_path, "catalog file")->required();
  compile_cmd->add_flag("--simulate-2vl", simulate, "rewrite negated predicates first");
  compile_cmd->add_flag("--ast", ast, "print the AST dump instead of SQL");
  add_sql(compile_cmd, sql);

  auto* run_cmd = app.add_subcommand("run", "evaluate a query");
  run_cmd->add_option("--catalog", catalog_path, "catalog file of the original relations")->required();
  run_cmd->add_option("--data", data_dir, "data directory")->required();
  run_cmd->add_option("--mode", mode, "semantics")->check(CLI::IsMember({"3vl", "2vl", "cs"}));
  run_cmd->add_flag("--simulate-2vl", simulate, "cs mode: rewrite negated predicates first");
  run_cmd->add_flag("--normalized", normalized,
                    "cs mode: --data holds normalized relations written by decompose");
  run_cmd->add_option("--out", out_dir, "write CSV files here instead of stdout");
  run_cmd->add_option("--null-token", null_token, "CSV token for Null");
  add_sql(run_cmd, sql);

  std::uint64_t trials = 1000;
  GeneratorConfig cfg;
  std::string prop = "all", replay_dir;
  unsigned jobs = std::max(1U, std::thread::hardware_concurrency());
  auto* check_cmd = app.add_subcommand("check", "randomized equivalence checks");
  check_cmd->add_option("--trials", trials, "trials per property");
  check_cmd->add_option("--seed", cfg.seed, "base seed");
  check_cmd->add_option("--prop", prop, "property")
      ->check(CLI::IsMember({"51", "52", "nullfree", "2vl", "size", "all"}));
  check_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  check_cmd->add_option("--out", out_dir, "write counterexamples here");
  check_cmd->add_option("--replay", replay_dir, "replay a written counterexample");
  check_cmd->add_option("--max-tables", cfg.max_tables, "tables per instance");
  check_cmd->add_option("--max-columns", cfg.max_columns, "columns per table");
  check_cmd->add_option("--max-rows", cfg.max_rows, "rows per table");
  check_cmd->add_option("--null-probability", cfg.null_probability, "chance a cell is Null");
  check_cmd->add_option("--max-depth", cfg.max_formula_depth, "formula depth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*decompose_cmd) {
      CsvOptions options = csv_options(null_token);
      Database db = load_database(load_catalog(catalog_path), data_dir, options);
      emit_database(materialize(decompose_db(db)), out_dir, options);
      return 0;
    }
    if (*expand_cmd) {
      Catalog catalog = load_catalog(catalog_path);
      Query q = parse(sql.read(), Dialect::Columnar);
      if (simulate) q = simulate_2vl(q);
      ExpandedQuerySet set = expand(q, catalog);
      if (!ast) {
        out << format_expansion(set);
        return 0;
      }
      for (const auto& branch : set.branches) {
        out << dump_ast(branch.key);
        for (const auto& m : branch.outputs) if (m) out << dump_ast(*m);
        for (const auto& g : branch.guards) if (g) out << dump_ast(*g);
      }
      return 0;
    }
    if (*compile_cmd) {
      Catalog catalog = load_catalog(catalog_path);
      Query q = parse(sql.read(), Dialect::Columnar);
      if (simulate) q = simulate_2vl(q);
      Query compiled = compile_to_3vl(q, catalog);
      out << (ast ? dump_ast(compiled) : print(compiled) + "\n");
      return 0;
    }
    if (*run_cmd) {
      CsvOptions options = csv_options(null_token);
      Catalog catalog = load_catalog(catalog_path);
      if (mode != "cs" && (simulate || normalized)) {
        err << "error: --simulate-2vl and --normalized apply only to --mode cs\n";
        return exit_usage;
      }
      if (mode != "cs") {
        Database db = load_database(catalog, data_dir, options);
        Query q = parse(sql.read(), Dialect::ThreeValued);
        EvalMode m = mode == "3vl" ? EvalMode::ThreeValued : EvalMode::TwoValued;
        write_relation(run_query(q, db, m), out, out_dir, "result.csv", options);
        return 0;
      }
      NormalizedDatabase ndb =
          normalized ? regroup(load_database(normalized_catalog(catalog), data_dir, options), catalog)
                     : decompose_db(load_database(catalog, data_dir, options));
      Query q = parse(sql.read(), Dialect::Columnar);
      if (simulate) q = simulate_2vl(q);
      NormalizedGroup g = run_cs(q, ndb);
      Relation joined = full_outer_join_group(g);
      if (out_dir.empty()) {
        write_csv(out, joined, options);
        return 0;
      }
      std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      emit_csv(g.key_relation(), dir / (g.key_relation_name() + ".csv"), options);
      for (std::size_t i = 0; i < g.attributes.size(); ++i) {
        emit_csv(g.column_relation(i), dir / (g.column_relation_name(i) + ".csv"), options);
      }
      emit_csv(joined, dir / "result.csv", options);
      return 0;
    }
    if (*check_cmd) {
      if (!replay_dir.empty()) {
        TrialOutcome o = replay_counterexample(replay_dir);
        if (o.pass) {
          out << "replay: passes\n";
          return 0;
        }
        out << "replay: fails: " << o.counterexample->message << '\n';
        return exit_counterexample;
      }
      cfg.validate();
      std::vector<Property> props;
      if (prop == "all") {
        props = all_properties();
      } else {
        props.push_back(*parse_property(prop));
      }
      bool failed = false;
      for (Property p : props) {
        PropertyReport report = run_trials(p, cfg, trials, jobs);
        out << format_report(report);
        failed = failed || report.failures > 0;
        if (!out_dir.empty()) {
          for (const auto& c : report.counterexamples) {
            write_counterexample(c, std::filesystem::path(out_dir) /
                                        ("prop_" + std::string(to_string(p)) + "_trial_" +
                                         std::to_string(c.trial)));
          }
        }
      }
      return failed ? exit_counterexample : 0;
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_input;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  }
  return exit_usage;
}

}  // namespace colsem::cli

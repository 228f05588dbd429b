#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "colsem/cli.hpp"
#include "colsem/csv.hpp"
#include "fixtures.hpp"

using namespace colsem;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "colsem");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The author database on disk; Null cells are empty fields.
struct Workspace {
  fs::path root;
  fs::path catalog;
  fs::path data;

  explicit Workspace(const std::string& name)
      : root(fs::temp_directory_path() / ("colsem_test_cli_" + name)) {
    fs::remove_all(root);
    data = root / "data";
    emit_database(fixtures::authors_db(), data);
    catalog = data / "catalog.txt";
  }
  ~Workspace() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("expand prints the member queries") {
  Workspace w("expand");
  Run r = invoke({"expand", "--catalog", w.catalog.string(), "SELECT Address FROM R WHERE R.Author = \"Codd\""});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "-- key\n"
        "SELECT R_id.id FROM R_id, R_Author WHERE R_id.id = R_Author.id AND R_Author.Author = \"Codd\"\n;\n"
        "-- output Address\n"
        "SELECT R_id.id, R_Address.Address AS Address FROM R_id, R_Author, R_Address "
        "WHERE R_id.id = R_Author.id AND R_id.id = R_Address.id AND R_Author.Author = \"Codd\"\n;\n");
}

TEST_CASE("compile") {
  Workspace w("compile");
  Run r = invoke({"compile", "--catalog", w.catalog.string(), "SELECT Author FROM R WHERE R MISSING Address"});
  CHECK(r.code == 0);
  CHECK(r.out == "SELECT Author FROM R WHERE R.Address IS NULL\n");
  Run sim = invoke({"compile", "--simulate-2vl", "--catalog", w.catalog.string(),
                 "SELECT Author FROM R WHERE NOT (R.Address = \"San Jose\")"});
  CHECK(sim.out == "SELECT Author FROM R WHERE R.Address IS NULL OR NOT (R.Address = \"San Jose\")\n");
}

TEST_CASE("run in each mode") {
  Workspace w("run");
  std::vector<std::string> base{"run", "--catalog", w.catalog.string(), "--data", w.data.string()};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args);
  };
  CHECK(with({"SELECT Author FROM R WHERE R.Address = R.Address"}).out == "Author\nCodd\nBoyce\n");
  CHECK(with({"--mode", "2vl", "SELECT Author FROM R WHERE NOT (R.Address = \"San Jose\")"}).out ==
        "Author\nChamberlin\n");
  CHECK(with({"--mode", "3vl", "SELECT Author FROM R WHERE NOT (R.Address = \"San Jose\")"}).out == "Author\n");
  CHECK(with({"--mode", "cs", "SELECT Author FROM R WHERE R MISSING Address"}).out == "Author\nChamberlin\n");
  CHECK(with({"--mode", "cs", "--simulate-2vl", "SELECT Author FROM R WHERE NOT (R.Address = \"San Jose\")"}).out ==
        "Author\nChamberlin\n");
  CHECK(with({"--mode", "cs", "SELECT Author, Institute FROM R"}).out ==
        "Author,Institute\nCodd,IBM\nChamberlin,IBM\nBoyce,\n");
}

TEST_CASE("cs output files and normalized input") {
  Workspace w("files");
  fs::path norm = w.root / "norm";
  REQUIRE(invoke({"decompose", "--catalog", w.catalog.string(), "--data", w.data.string(), "--out", norm.string()})
              .code == 0);
  CHECK(slurp(norm / "R_id.csv") == "id\n1\n2\n3\n");
  CHECK(slurp(norm / "R_Institute.csv") == "id,Institute\n1,IBM\n2,IBM\n");
  CHECK(fs::exists(norm / "R_Author.csv"));
  CHECK(fs::exists(norm / "R_Address.csv"));

  const char* q = "SELECT Author, Address FROM R WHERE R.Institute = \"IBM\"";
  fs::path a = w.root / "a", b = w.root / "b";
  REQUIRE(invoke({"run", "--mode", "cs", "--catalog", w.catalog.string(), "--data", w.data.string(), "--out",
               a.string(), q}).code == 0);
  REQUIRE(invoke({"run", "--mode", "cs", "--normalized", "--catalog", w.catalog.string(), "--data", norm.string(),
               "--out", b.string(), q}).code == 0);
  for (const char* file : {"result_id.csv", "result_Author.csv", "result_Address.csv", "result.csv"}) {
    INFO(file);
    CHECK(slurp(a / file) == slurp(b / file));
  }
  CHECK(slurp(a / "result_Address.csv") == "id,Address\n1,San Jose\n");
  CHECK(slurp(a / "result.csv") == "Author,Address\nCodd,San Jose\nChamberlin,\n");
}

TEST_CASE("check is deterministic and independent of workers") {
  Run a = invoke({"check", "--trials", "60", "--seed", "7", "--jobs", "1"});
  Run b = invoke({"check", "--trials", "60", "--seed", "7", "--jobs", "3"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("property 51: 60 trials, 0 counterexamples") != std::string::npos);
  Run one = invoke({"check", "--trials", "20", "--prop", "2vl"});
  CHECK(one.out == "property 2vl: 20 trials, 0 counterexamples\n");
}

TEST_CASE("exit codes") {
  Workspace w("codes");
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"check", "--prop", "53"}).code == 1);
  CHECK(invoke({"run", "--catalog", w.catalog.string(), "--data", w.data.string(), "--normalized",
             "SELECT Author FROM R"}).code == 1);
  Run dialect = invoke({"run", "--catalog", w.catalog.string(), "--data", w.data.string(),
                     "SELECT Author FROM R WHERE R MISSING Address"});
  CHECK(dialect.code == 2);
  CHECK(dialect.err.rfind("error: DialectError: ", 0) == 0);
  Run syntax = invoke({"expand", "--catalog", w.catalog.string(), "SELECT FROM"});
  CHECK(syntax.code == 2);
  CHECK(invoke({"expand", "--catalog", (w.root / "nope.txt").string(), "SELECT 1"}).code == 2);
  CHECK(invoke({"check", "--replay", (w.root / "nothing").string()}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

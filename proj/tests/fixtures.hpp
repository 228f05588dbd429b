#pragma once

#include <string>
#include <vector>

#include "colsem/harness.hpp"
#include "colsem/relation.hpp"

namespace fixtures {

using colsem::ColumnType;
using colsem::Relation;
using colsem::Value;

inline Value s(const char* v) { return Value::string(v); }
inline Value i(std::int64_t v) { return Value::integer(v); }
inline Value null() { return Value::null(); }

// The author table with two missing cells.
inline Relation authors() {
  Relation r("R", {{"Author", ColumnType::Str}, {"Institute", ColumnType::Str}, {"Address", ColumnType::Str}});
  r.add_row({s("Codd"), s("IBM"), s("San Jose")});
  r.add_row({s("Chamberlin"), s("IBM"), null()});
  r.add_row({s("Boyce"), null(), s("San Jose")});
  return r;
}

inline colsem::Database authors_db() {
  colsem::Database db;
  db.add(authors());
  return db;
}

// R(x) = {(1), (Null)}.
inline colsem::Database one_and_null() {
  Relation r("R", {{"x", ColumnType::Int}});
  r.add_row({i(1)});
  r.add_row({null()});
  colsem::Database db;
  db.add(r);
  return db;
}

inline Relation relation(std::string name, colsem::Schema schema, std::vector<colsem::Row> rows) {
  Relation r(std::move(name), std::move(schema));
  for (auto& row : rows) r.add_row(std::move(row));
  return r;
}

// Random relation over all four column types; about 10% of rows are all-Null.
inline Relation random_relation(colsem::Rng& rng, double null_p, const std::string& name = "R") {
  colsem::Schema schema;
  int columns = rng.range(1, 4);
  for (int c = 0; c < columns; ++c) {
    static const ColumnType types[] = {ColumnType::Int, ColumnType::Float, ColumnType::Str,
                                       ColumnType::Bool};
    schema.push_back({"c" + std::to_string(c), types[rng.below(4)]});
  }
  Relation r(name, schema);
  int rows = rng.range(0, 8);
  for (int k = 0; k < rows; ++k) {
    colsem::Row row;
    bool all_null = rng.chance(0.1);
    for (const auto& col : schema) {
      if (all_null || rng.chance(null_p)) {
        row.push_back(Value::null());
        continue;
      }
      switch (col.type) {
        case ColumnType::Int: row.push_back(Value::integer(rng.range(-5, 5))); break;
        case ColumnType::Float: row.push_back(Value::real(rng.range(-50, 50) / 8.0)); break;
        case ColumnType::Bool: row.push_back(Value::boolean(rng.chance(0.5))); break;
        case ColumnType::Str: {
          static const std::vector<std::string> texts = {"", "a,b", "say \"hi\"", "two\nlines",
                                                         "San Jose", " pad "};
          row.push_back(Value::string(rng.pick(texts)));
          break;
        }
      }
    }
    r.add_row(std::move(row));
  }
  return r;
}

}  // namespace fixtures

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colsem/value.hpp"

namespace colsem {

struct Column {
  std::string name;
  ColumnType type = ColumnType::Int;

  bool operator==(const Column&) const = default;
};

using Schema = std::vector<Column>;
using Row = std::vector<Value>;

/// A named multiset of rows. Every row has one cell per column and every
/// non-null cell matches its column's declared type.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, Schema columns);

  const std::string& name() const { return name_; }
  const Schema& columns() const { return columns_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t arity() const { return columns_.size(); }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  std::optional<std::size_t> column_index(std::string_view column) const;

  /// Appends a row, enforcing arity and per-column types.
  void add_row(Row row);
  void set_name(std::string name) { name_ = std::move(name); }

 private:
  std::string name_;
  Schema columns_;
  std::vector<Row> rows_;
};

/// Rows sorted by Value's total order; the canonical form of a multiset.
std::vector<Row> sorted_rows(const Relation& r);

/// Multiset equality of rows plus equality of column names and types.
/// Relation names are ignored.
bool same_contents(const Relation& a, const Relation& b);

/// First row (in sorted order) whose multiplicity differs between a and b.
std::optional<Row> first_differing_row(const Relation& a, const Relation& b);

std::string format_row(const Row& row);
/// Fixed-width text table, for reports and debugging.
std::string format_table(const Relation& r);

/// Relation schemas keyed by relation name.
struct Catalog {
  std::map<std::string, Schema> relations;

  const Schema* find(std::string_view name) const;
  void add(const std::string& name, Schema schema);
};

/// A database instance: relations keyed by unique name.
struct Database {
  std::map<std::string, Relation> relations;

  void add(Relation r);
  const Relation* find(std::string_view name) const;
  const Relation& at(std::string_view name) const;
  Catalog catalog() const;
};

}  // namespace colsem

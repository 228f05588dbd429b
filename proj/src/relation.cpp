#include "colsem/relation.hpp"

#include <algorithm>
#include <sstream>

#include "colsem/error.hpp"

namespace colsem {

Relation::Relation(std::string name, Schema columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

std::optional<std::size_t> Relation::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == column) return i;
  }
  return std::nullopt;
}

void Relation::add_row(Row row) {
  if (row.size() != columns_.size()) {
    throw Error(ErrorKind::ArityMismatch,
                "relation " + name_ + " expects " + std::to_string(columns_.size()) +
                    " values per row, got " + std::to_string(row.size()));
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!row[i].is_null() && row[i].type() != columns_[i].type) {
      throw Error(ErrorKind::TypeMismatch,
                  "column " + name_ + "." + columns_[i].name + " has type " +
                      std::string(to_string(columns_[i].type)) + " but got " +
                      row[i].debug_string());
    }
  }
  rows_.push_back(std::move(row));
}

std::vector<Row> sorted_rows(const Relation& r) {
  std::vector<Row> rows = r.rows();
  std::sort(rows.begin(), rows.end());
  return rows;
}

bool same_contents(const Relation& a, const Relation& b) {
  return a.columns() == b.columns() && sorted_rows(a) == sorted_rows(b);
}

std::optional<Row> first_differing_row(const Relation& a, const Relation& b) {
  auto ra = sorted_rows(a);
  auto rb = sorted_rows(b);
  std::size_t i = 0, j = 0;
  while (i < ra.size() || j < rb.size()) {
    if (j == rb.size()) return ra[i];
    if (i == ra.size()) return rb[j];
    if (ra[i] == rb[j]) {
      ++i;
      ++j;
    } else {
      return ra[i] < rb[j] ? ra[i] : rb[j];
    }
  }
  return std::nullopt;
}

std::string format_row(const Row& row) {
  std::string out = "(";
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ", ";
    out += row[i].debug_string();
  }
  return out + ")";
}

std::string format_table(const Relation& r) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(r.arity(), 0);
  std::vector<std::string> header;
  for (std::size_t c = 0; c < r.arity(); ++c) {
    header.push_back(r.columns()[c].name);
    width[c] = header.back().size();
  }
  for (const auto& row : sorted_rows(r)) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line.push_back(row[c].debug_string());
      width[c] = std::max(width[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  std::ostringstream os;
  os << r.name() << " (" << r.size() << " rows)\n";
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      os << (c ? " | " : "  ") << line[c] << std::string(width[c] - line[c].size(), ' ');
    }
    os << '\n';
  };
  emit(header);
  for (const auto& line : cells) emit(line);
  return os.str();
}

const Schema* Catalog::find(std::string_view name) const {
  auto it = relations.find(std::string(name));
  return it == relations.end() ? nullptr : &it->second;
}

void Catalog::add(const std::string& name, Schema schema) {
  if (!relations.emplace(name, std::move(schema)).second) {
    throw Error(ErrorKind::NameCollision, "duplicate relation name " + name);
  }
}

void Database::add(Relation r) {
  std::string name = r.name();
  if (!relations.emplace(name, std::move(r)).second) {
    throw Error(ErrorKind::NameCollision, "duplicate relation name " + name);
  }
}

const Relation* Database::find(std::string_view name) const {
  auto it = relations.find(std::string(name));
  return it == relations.end() ? nullptr : &it->second;
}

const Relation& Database::at(std::string_view name) const {
  if (const Relation* r = find(name)) return *r;
  throw Error(ErrorKind::UnknownTable, "unknown relation " + std::string(name));
}

Catalog Database::catalog() const {
  Catalog c;
  for (const auto& [name, rel] : relations) c.relations.emplace(name, rel.columns());
  return c;
}

}  // namespace colsem

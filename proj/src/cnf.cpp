#include "colsem/cnf.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "colsem/error.hpp"

namespace colsem {

Relation NormalizedGroup::key_relation() const {
  Relation r(key_relation_name(), Schema{{"id", ColumnType::Int}});
  for (OpaqueId id : keys) r.add_row({Value::integer(static_cast<std::int64_t>(id))});
  return r;
}

Relation NormalizedGroup::column_relation(std::size_t i) const {
  Relation r(column_relation_name(i), Schema{{"id", ColumnType::Int}, attributes.at(i)});
  for (const auto& [id, v] : entries.at(i)) {
    r.add_row({Value::integer(static_cast<std::int64_t>(id)), v});
  }
  return r;
}

void NormalizedGroup::validate() const {
  std::set<OpaqueId> key_set;
  for (OpaqueId id : keys) {
    if (!key_set.insert(id).second) {
      throw Error(ErrorKind::InvalidQuery,
                  "duplicate id " + std::to_string(id) + " in " + key_relation_name());
    }
  }
  if (entries.size() != attributes.size()) {
    throw Error(ErrorKind::ArityMismatch, "group " + base_name + " has " +
                                              std::to_string(attributes.size()) +
                                              " attributes but " +
                                              std::to_string(entries.size()) + " column relations");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::set<OpaqueId> seen;
    for (const auto& [id, v] : entries[i]) {
      if (!key_set.count(id)) {
        throw Error(ErrorKind::DanglingId, "id " + std::to_string(id) + " in " +
                                               column_relation_name(i) + " is not in " +
                                               key_relation_name());
      }
      if (!seen.insert(id).second) {
        throw Error(ErrorKind::InvalidQuery,
                    "id " + std::to_string(id) + " appears twice in " + column_relation_name(i));
      }
      if (v.is_null()) {
        throw Error(ErrorKind::TypeMismatch, "Null value in " + column_relation_name(i));
      }
    }
  }
}

NormalizedGroup decompose(const Relation& r) {
  NormalizedGroup g;
  g.base_name = r.name();
  g.attributes = r.columns();
  g.entries.resize(r.arity());
  for (std::size_t row = 0; row < r.size(); ++row) {
    OpaqueId id = row + 1;
    g.keys.push_back(id);
    for (std::size_t c = 0; c < r.arity(); ++c) {
      const Value& v = r.rows()[row][c];
      if (!v.is_null()) g.entries[c].emplace_back(id, v);
    }
  }
  return g;
}

NormalizedGroup normalize_output(const Relation& r) { return decompose(r); }

NormalizedDatabase decompose_db(const Database& db) {
  NormalizedDatabase ndb;
  std::map<std::string, std::string> generated;  // name -> base relation
  auto claim = [&](const std::string& name, const std::string& base) {
    if (db.find(name)) {
      throw Error(ErrorKind::NameCollision, "generated relation name " + name + " (from " + base +
                                                ") clashes with an existing relation");
    }
    auto [it, inserted] = generated.emplace(name, base);
    if (!inserted) {
      throw Error(ErrorKind::NameCollision, "generated relation name " + name + " is produced by " +
                                                it->second + " and " + base);
    }
  };
  for (const auto& [name, rel] : db.relations) {
    NormalizedGroup g = decompose(rel);
    claim(g.key_relation_name(), name);
    for (std::size_t i = 0; i < g.attributes.size(); ++i) claim(g.column_relation_name(i), name);
    ndb.emplace(name, std::move(g));
  }
  return ndb;
}

Relation full_outer_join_group(const NormalizedGroup& g) {
  std::unordered_map<OpaqueId, std::size_t> position;
  Relation out(g.base_name, g.attributes);
  std::vector<Row> rows;
  for (OpaqueId id : g.keys) {
    position.emplace(id, rows.size());
    rows.emplace_back(g.attributes.size());
  }
  for (std::size_t i = 0; i < g.entries.size(); ++i) {
    for (const auto& [id, v] : g.entries[i]) {
      auto it = position.find(id);
      if (it == position.end()) {
        throw Error(ErrorKind::DanglingId, "id " + std::to_string(id) + " in " +
                                               g.column_relation_name(i) + " is not in " +
                                               g.key_relation_name());
      }
      rows[it->second].at(i) = v;
    }
  }
  for (auto& row : rows) out.add_row(std::move(row));
  return out;
}

Database full_outer_join_db(const NormalizedDatabase& ndb) {
  Database db;
  for (const auto& [name, g] : ndb) {
    Relation r = full_outer_join_group(g);
    r.set_name(name);
    db.add(std::move(r));
  }
  return db;
}

Database materialize(const NormalizedDatabase& ndb) {
  Database db;
  for (const auto& [name, g] : ndb) {
    db.add(g.key_relation());
    for (std::size_t i = 0; i < g.attributes.size(); ++i) db.add(g.column_relation(i));
  }
  return db;
}

Catalog normalized_catalog(const Catalog& base) {
  Catalog out;
  for (const auto& [name, schema] : base.relations) {
    out.add(name + "_id", Schema{{"id", ColumnType::Int}});
    for (const auto& c : schema) out.add(name + "_" + c.name, Schema{{"id", ColumnType::Int}, c});
  }
  return out;
}

namespace {

OpaqueId as_id(const Value& v, const std::string& relation) {
  if (!v.is_int() || v.as_int() < 0) {
    throw Error(ErrorKind::TypeParseError,
                "relation " + relation + " holds a non-id value " + v.debug_string());
  }
  return static_cast<OpaqueId>(v.as_int());
}

}  // namespace

NormalizedDatabase regroup(const Database& normalized, const Catalog& base) {
  NormalizedDatabase ndb;
  for (const auto& [name, schema] : base.relations) {
    NormalizedGroup g;
    g.base_name = name;
    g.attributes = schema;
    const Relation& keys = normalized.at(g.key_relation_name());
    for (const Row& row : keys.rows()) g.keys.push_back(as_id(row.at(0), keys.name()));
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const Relation& col = normalized.at(g.column_relation_name(i));
      std::vector<std::pair<OpaqueId, Value>> pairs;
      for (const Row& row : col.rows()) pairs.emplace_back(as_id(row.at(0), col.name()), row.at(1));
      std::sort(pairs.begin(), pairs.end());
      g.entries.push_back(std::move(pairs));
    }
    g.validate();
    ndb.emplace(name, std::move(g));
  }
  return ndb;
}

bool equal_up_to_id_renaming(const NormalizedGroup& a, const NormalizedGroup& b) {
  // Each id stands for the partial row it keys, so a bijection exists exactly
  // when the multisets of recomposed rows agree.
  if (a.attributes != b.attributes) return false;
  return sorted_rows(full_outer_join_group(a)) == sorted_rows(full_outer_join_group(b));
}

std::string format_group(const NormalizedGroup& g) {
  std::ostringstream os;
  os << g.key_relation_name() << ": {";
  for (std::size_t i = 0; i < g.keys.size(); ++i) os << (i ? ", " : "") << g.keys[i];
  os << "}\n";
  for (std::size_t c = 0; c < g.attributes.size(); ++c) {
    os << g.column_relation_name(c) << ": {";
    for (std::size_t i = 0; i < g.entries[c].size(); ++i) {
      os << (i ? ", " : "") << '(' << g.entries[c][i].first << ", "
         << g.entries[c][i].second.debug_string() << ')';
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace colsem

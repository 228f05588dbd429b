#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "colsem/relation.hpp"

namespace colsem {

using OpaqueId = std::uint64_t;

/// A relation in Column Normal Form: the set of row keys plus, for every
/// attribute, the (id, value) pairs of the rows where that attribute is
/// present. Conceptually these are the relations `<base>_id(id)` and
/// `<base>_<attr>(id, attr)`.
struct NormalizedGroup {
  std::string base_name;
  Schema attributes;
  std::vector<OpaqueId> keys;
  /// entries[i] holds the pairs for attributes[i], ordered by id.
  std::vector<std::vector<std::pair<OpaqueId, Value>>> entries;

  std::string key_relation_name() const { return base_name + "_id"; }
  std::string column_relation_name(std::size_t i) const {
    return base_name + "_" + attributes.at(i).name;
  }

  Relation key_relation() const;
  Relation column_relation(std::size_t i) const;

  /// Throws DanglingId if a pair refers to an unknown key, InvalidQuery on a
  /// duplicate key or a second pair for one id, TypeMismatch on a Null value.
  void validate() const;
};

using NormalizedDatabase = std::map<std::string, NormalizedGroup>;

/// Row i (0-based, load order) gets id i+1. Null cells produce no pair.
NormalizedGroup decompose(const Relation& r);
/// Same contract as decompose; the entry point used for query outputs.
NormalizedGroup normalize_output(const Relation& r);

/// Decomposes every relation. Throws NameCollision when a generated
/// relation name equals an existing relation name or another generated one.
NormalizedDatabase decompose_db(const Database& db);

/// One row per key with Null where the attribute has no pair; the id column
/// is dropped. Throws DanglingId for pairs whose id is not a key.
Relation full_outer_join_group(const NormalizedGroup& g);
Database full_outer_join_db(const NormalizedDatabase& ndb);

/// The normalized relations as an ordinary (null-free) database; ids are Int.
Database materialize(const NormalizedDatabase& ndb);
/// Catalog of the normalized relations for a base catalog.
Catalog normalized_catalog(const Catalog& base);
/// Inverse of materialize, given the base catalog.
NormalizedDatabase regroup(const Database& normalized, const Catalog& base);

/// True iff some bijection on ids maps one group onto the other. Attribute
/// names and types must match in order; the base name is ignored.
bool equal_up_to_id_renaming(const NormalizedGroup& a, const NormalizedGroup& b);

/// Key list followed by each column relation, for reports.
std::string format_group(const NormalizedGroup& g);

}  // namespace colsem

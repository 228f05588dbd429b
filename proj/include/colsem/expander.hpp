#pragma once

#include <optional>
#include <string>
#include <vector>

#include "colsem/ast.hpp"
#include "colsem/cnf.hpp"
#include "colsem/relation.hpp"

namespace colsem {

// Naming over normalized relations. A FROM entry bound as `b` over base
// relation `R` becomes `R_id AS b_id` and, per attribute a, `R_a AS b_a`
// (no alias when b == R). References use the binding names: b_id.id, b_a.a.

/// One `b_id.id` reference per FROM entry, in FROM order.
std::vector<ColumnRef> ids(const std::vector<TableRef>& tables);

/// b.a -> b_a.a. Constants and operators are untouched.
ColumnRef rename(const ColumnRef& ref);
Expression rename(const Expression& e);
AggregateExpression rename(const AggregateExpression& a);
std::vector<ColumnRef> rename(const std::vector<ColumnRef>& refs);

/// Replaces every `b MISSING a` with `b_id.id NOT IN (SELECT b_a.id FROM R_a AS b_a)`.
/// `from` maps bindings to base relations.
Formula desugar_missing(const Formula& f, const std::vector<TableRef>& from);

/// Pushes NOT down to atoms with De Morgan and removes double negations.
/// Valid under Kleene logic, so the formula's 3-valued meaning is unchanged.
Formula to_nnf(const Formula& f);

/// NNF, then every negated predicate NOT P over attributes b1.a1 ... bn.an
/// becomes `b1 MISSING a1 OR ... OR bn MISSING an OR NOT P`.
Formula simulate_2vl_negation(const Formula& f);
/// Applies simulate_2vl_negation to the WHERE clause.
Query simulate_2vl(const Query& q);

/// `e IS NULL` -> OR of MISSING over the columns of e (`1 = 0` when e has
/// none). Turns a 3-valued query into a columnar one.
Query isnull_to_missing(const Query& q);

/// Attributes that must be present for the NNF formula to hold: atoms need
/// all their attributes, `NOT MISSING` needs its attribute, AND takes the
/// union and OR the intersection.
std::vector<ColumnRef> required_attributes(const Formula& nnf);

/// Rewrites a columnar WHERE formula for evaluation over normalized relations
/// where the attributes in `present` are joined into the enclosing query.
/// The formula is put in NNF; an atom whose attributes are all present is
/// renamed in place. Any other literal L becomes
/// `(ids of its tables) IN (SELECT ... FROM its attribute relations WHERE L')`
/// and MISSING is desugared.
Formula expand_formula(const Formula& f, const std::vector<TableRef>& from,
                       const std::vector<ColumnRef>& present);

/// One presence pattern of the GROUP BY columns whose presence the WHERE
/// clause does not already force. Non-aggregate queries have one branch.
struct ExpansionBranch {
  std::string description;
  /// GROUP BY columns present in this branch, in GROUP BY order.
  std::vector<ColumnRef> present_group_by;
  /// Non-aggregate: SELECT ids. Aggregate: SELECT ids, present group-by values.
  Query key;
  /// Per output column. Non-aggregate: SELECT ids, value. Aggregate:
  /// SELECT group-by values, value GROUP BY group-by values. Absent when the
  /// column is missing in every row of the branch or is a constant the
  /// assembler fills in.
  std::vector<std::optional<Query>> outputs;
  /// Per aggregate output: rows of groups holding a missing argument; such a
  /// group's aggregate is missing.
  std::vector<std::optional<Query>> guards;
};

/// The queries that together compute a columnar query's output in Column
/// Normal Form.
struct ExpandedQuerySet {
  Query source;  // bound columnar query
  Schema output_schema;
  bool aggregate = false;
  std::size_t table_count = 0;
  std::vector<ExpansionBranch> branches;
  /// Per output column: a value the assembler supplies for every output row
  /// (constant select expressions of aggregate queries).
  std::vector<std::optional<Value>> constants;
};

/// Throws UnknownTable/UnknownAttribute from binding, Dialect on IS NULL,
/// InvalidQuery on an empty FROM or a user IN subquery, NameCollision when
/// generated binding names clash.
ExpandedQuerySet expand(const Query& q, const Catalog& catalog);

/// Catalog order is lost in Catalog's map; the base catalog of a normalized
/// database keeps each group's attribute order.
Catalog base_catalog(const NormalizedDatabase& ndb);

/// Runs every member under NullFree over the materialized normalized
/// relations and assembles the output group (base name "result").
NormalizedGroup run_cs(const Query& q, const NormalizedDatabase& ndb);
NormalizedGroup run_cs(const ExpandedQuerySet& set, const Database& materialized);

/// Standard query over the original tables: MISSING(b, a) -> b.a IS NULL,
/// everything else unchanged. Throws Dialect on IS NULL.
Query compile_to_3vl(const Query& q, const Catalog& catalog);

/// `-- key`, `-- output NAME`, `-- guard NAME` comment lines each followed by
/// one SQL statement and a `;` line.
std::string format_expansion(const ExpandedQuerySet& set);

}  // namespace colsem

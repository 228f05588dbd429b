#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "colsem/ast.hpp"
#include "colsem/relation.hpp"

namespace colsem {

/// Parses one statement of the supported fragment:
///
///   SELECT (* | item, ...) [FROM table [AS alias], ...] [WHERE formula]
///   [GROUP BY column, ...] [;]
///
/// Aggregate items are collected into `select_aggs` and the remaining items
/// into `select_exprs`, each list keeping its source order. Qualified column
/// references must name a FROM entry. IS NULL is rejected under the columnar
/// dialect and MISSING under the 3-valued one.
Query parse(std::string_view text, Dialect dialect);

/// Resolves every column reference against the catalog, expands `SELECT *`
/// in catalog column order, and type-checks expressions and predicates.
/// Idempotent on bound queries.
Query bind(const Query& q, const Catalog& catalog);

/// parse + bind.
Query parse_bound(std::string_view text, Dialect dialect, const Catalog& catalog);

/// Declared type of an expression over a bound query's FROM list.
ColumnType expression_type(const Expression& e, const Query& bound, const Catalog& catalog);

/// Output column names and types of a bound query: aliases where given,
/// otherwise the attribute name of a bare column, `<func>_<attr>` for an
/// aggregate over a bare column, and `expr` / `<func>` otherwise. Duplicate
/// names get `_2`, `_3`, ... suffixes.
Schema output_schema(const Query& bound, const Catalog& catalog);

struct PrintOptions {
  char string_quote = '"';
};

/// Single-line SQL text. parse(print(q)) == q for any well-formed q admitted
/// by the parse dialect.
std::string print(const Query& q, const PrintOptions& options = {});
std::string print(const Expression& e, const PrintOptions& options = {});
std::string print(const Formula& f, const PrintOptions& options = {});
std::string print(const AggregateExpression& a, const PrintOptions& options = {});

/// Debug dump: one node per line as an s-expression, two-space indent.
std::string dump_ast(const Query& q);

}  // namespace colsem

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colsem/value.hpp"

namespace colsem {

/// Which surface language a query is written in: standard SQL under
/// 3-valued logic (IS NULL allowed) or the columnar dialect (MISSING allowed).
enum class Dialect { ThreeValued, Columnar };

std::string_view to_string(Dialect d);

/// `table.attribute`. Before binding `table` may be empty (unqualified
/// reference); after binding it always names a FROM entry (alias or name).
struct ColumnRef {
  std::string table;
  std::string attribute;

  bool operator==(const ColumnRef&) const = default;
  auto operator<=>(const ColumnRef&) const = default;
};

enum class FunctionOp { Add, Sub, Mul, Div, Concat };

std::string_view symbol(FunctionOp op);

struct Expression {
  enum class Kind { Constant, Column, Function };

  Kind kind = Kind::Constant;
  Value constant;
  ColumnRef column;
  FunctionOp op = FunctionOp::Add;
  std::vector<Expression> args;

  static Expression constant_of(Value v);
  static Expression column_of(std::string table, std::string attribute);
  static Expression column_of(ColumnRef ref);
  static Expression apply(FunctionOp op, Expression lhs, Expression rhs);

  bool operator==(const Expression&) const = default;
};

enum class AggregateFunc { Count, Sum, Min, Max, Avg };

std::string_view to_string(AggregateFunc f);

/// `func(arg)` or `COUNT(*)` (star set, no argument).
struct AggregateExpression {
  AggregateFunc func = AggregateFunc::Count;
  bool star = false;
  std::optional<Expression> arg;

  static AggregateExpression count_star();
  static AggregateExpression of(AggregateFunc func, Expression arg);

  bool operator==(const AggregateExpression&) const = default;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view symbol(CompareOp op);
/// The operator whose result is the Boolean negation (for non-null operands).
CompareOp negate(CompareOp op);

struct Query;

/// WHERE-clause formulas. `Membership` is `(e1, ..., en) [NOT] IN (subquery)`;
/// the single-operand NOT IN form is what MISSING desugars to.
struct Formula {
  enum class Kind { Predicate, IsNull, Missing, Membership, And, Or, Not };

  Kind kind = Kind::Predicate;
  CompareOp op = CompareOp::Eq;
  std::vector<Expression> operands;  // Predicate: lhs, rhs. IsNull: arg. Membership: tuple.
  ColumnRef missing;                 // Missing: table + attribute.
  std::shared_ptr<const Query> subquery;
  bool negated = false;              // Membership: NOT IN.
  std::vector<Formula> children;     // And/Or: two. Not: one.

  static Formula predicate(CompareOp op, Expression lhs, Expression rhs);
  static Formula is_null(Expression arg);
  static Formula missing_of(std::string table, std::string attribute);
  static Formula membership(std::vector<Expression> tuple, Query subquery, bool negated);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);
  static Formula negation(Formula child);

  const Formula& lhs() const { return children.at(0); }
  const Formula& rhs() const { return children.at(1); }
};

bool operator==(const Formula& a, const Formula& b);

struct TableRef {
  std::string name;
  std::optional<std::string> alias;

  /// The name column references use for this entry.
  const std::string& binding() const { return alias ? *alias : name; }

  bool operator==(const TableRef&) const = default;
};

struct SelectItem {
  Expression expr;
  std::optional<std::string> alias;

  bool operator==(const SelectItem&) const = default;
};

struct AggregateItem {
  AggregateExpression agg;
  std::optional<std::string> alias;

  bool operator==(const AggregateItem&) const = default;
};

/// SELECT e..., agg... FROM tables WHERE formula GROUP BY columns.
/// `star` marks an unexpanded `SELECT *`; binding replaces it with the
/// catalog's columns.
struct Query {
  bool star = false;
  std::vector<SelectItem> select_exprs;
  std::vector<AggregateItem> select_aggs;
  std::vector<TableRef> from;
  std::optional<Formula> where;
  std::vector<ColumnRef> group_by;

  bool is_aggregate() const { return !select_aggs.empty() || !group_by.empty(); }
  std::size_t output_arity() const { return select_exprs.size() + select_aggs.size(); }
};

bool operator==(const Query& a, const Query& b);

/// Conjunction of a list; nullopt for the empty list.
std::optional<Formula> conjoin(std::vector<Formula> parts);
/// Flattens nested ANDs into their conjuncts.
void collect_conjuncts(const Formula& f, std::vector<Formula>& out);

/// Distinct column references in first-occurrence order.
void collect_columns(const Expression& e, std::vector<ColumnRef>& out);
void collect_columns(const AggregateExpression& a, std::vector<ColumnRef>& out);
/// Column references of the formula itself; subqueries are not entered.
void collect_columns(const Formula& f, std::vector<ColumnRef>& out);

/// Number of AST nodes, counting the query, each clause item, each
/// expression/formula node and each subquery node.
std::size_t node_count(const Expression& e);
std::size_t node_count(const AggregateExpression& a);
std::size_t node_count(const Formula& f);
std::size_t node_count(const Query& q);

}  // namespace colsem

#include "colsem/ast.hpp"

#include <algorithm>

namespace colsem {

std::string_view to_string(Dialect d) {
  return d == Dialect::ThreeValued ? "3vl" : "cs";
}

std::string_view symbol(FunctionOp op) {
  switch (op) {
    case FunctionOp::Add: return "+";
    case FunctionOp::Sub: return "-";
    case FunctionOp::Mul: return "*";
    case FunctionOp::Div: return "/";
    case FunctionOp::Concat: return "||";
  }
  return "?";
}

std::string_view to_string(AggregateFunc f) {
  switch (f) {
    case AggregateFunc::Count: return "COUNT";
    case AggregateFunc::Sum: return "SUM";
    case AggregateFunc::Min: return "MIN";
    case AggregateFunc::Max: return "MAX";
    case AggregateFunc::Avg: return "AVG";
  }
  return "?";
}

std::string_view symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

CompareOp negate(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return CompareOp::Ne;
    case CompareOp::Ne: return CompareOp::Eq;
    case CompareOp::Lt: return CompareOp::Ge;
    case CompareOp::Le: return CompareOp::Gt;
    case CompareOp::Gt: return CompareOp::Le;
    case CompareOp::Ge: return CompareOp::Lt;
  }
  return op;
}

Expression Expression::constant_of(Value v) {
  Expression e;
  e.kind = Kind::Constant;
  e.constant = std::move(v);
  return e;
}

Expression Expression::column_of(std::string table, std::string attribute) {
  return column_of(ColumnRef{std::move(table), std::move(attribute)});
}

Expression Expression::column_of(ColumnRef ref) {
  Expression e;
  e.kind = Kind::Column;
  e.column = std::move(ref);
  return e;
}

Expression Expression::apply(FunctionOp op, Expression lhs, Expression rhs) {
  Expression e;
  e.kind = Kind::Function;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

AggregateExpression AggregateExpression::count_star() {
  AggregateExpression a;
  a.func = AggregateFunc::Count;
  a.star = true;
  return a;
}

AggregateExpression AggregateExpression::of(AggregateFunc func, Expression arg) {
  AggregateExpression a;
  a.func = func;
  a.arg = std::move(arg);
  return a;
}

Formula Formula::predicate(CompareOp op, Expression lhs, Expression rhs) {
  Formula f;
  f.kind = Kind::Predicate;
  f.op = op;
  f.operands.push_back(std::move(lhs));
  f.operands.push_back(std::move(rhs));
  return f;
}

Formula Formula::is_null(Expression arg) {
  Formula f;
  f.kind = Kind::IsNull;
  f.operands.push_back(std::move(arg));
  return f;
}

Formula Formula::missing_of(std::string table, std::string attribute) {
  Formula f;
  f.kind = Kind::Missing;
  f.missing = ColumnRef{std::move(table), std::move(attribute)};
  return f;
}

Formula Formula::membership(std::vector<Expression> tuple, Query subquery, bool negated) {
  Formula f;
  f.kind = Kind::Membership;
  f.operands = std::move(tuple);
  f.subquery = std::make_shared<const Query>(std::move(subquery));
  f.negated = negated;
  return f;
}

Formula Formula::conj(Formula lhs, Formula rhs) {
  Formula f;
  f.kind = Kind::And;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

Formula Formula::disj(Formula lhs, Formula rhs) {
  Formula f;
  f.kind = Kind::Or;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

Formula Formula::negation(Formula child) {
  Formula f;
  f.kind = Kind::Not;
  f.children.push_back(std::move(child));
  return f;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::Predicate:
      return a.op == b.op && a.operands == b.operands;
    case Formula::Kind::IsNull:
      return a.operands == b.operands;
    case Formula::Kind::Missing:
      return a.missing == b.missing;
    case Formula::Kind::Membership:
      if (a.negated != b.negated || a.operands != b.operands) return false;
      if (!a.subquery || !b.subquery) return a.subquery == b.subquery;
      return *a.subquery == *b.subquery;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Not:
      return a.children == b.children;
  }
  return false;
}

bool operator==(const Query& a, const Query& b) {
  return a.star == b.star && a.select_exprs == b.select_exprs &&
         a.select_aggs == b.select_aggs && a.from == b.from && a.where == b.where &&
         a.group_by == b.group_by;
}

std::optional<Formula> conjoin(std::vector<Formula> parts) {
  if (parts.empty()) return std::nullopt;
  Formula acc = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::conj(std::move(acc), std::move(parts[i]));
  return acc;
}

void collect_conjuncts(const Formula& f, std::vector<Formula>& out) {
  if (f.kind == Formula::Kind::And) {
    collect_conjuncts(f.lhs(), out);
    collect_conjuncts(f.rhs(), out);
  } else {
    out.push_back(f);
  }
}

namespace {
void add_unique(std::vector<ColumnRef>& out, const ColumnRef& ref) {
  if (std::find(out.begin(), out.end(), ref) == out.end()) out.push_back(ref);
}
}  // namespace

void collect_columns(const Expression& e, std::vector<ColumnRef>& out) {
  switch (e.kind) {
    case Expression::Kind::Constant: return;
    case Expression::Kind::Column: add_unique(out, e.column); return;
    case Expression::Kind::Function:
      for (const auto& a : e.args) collect_columns(a, out);
      return;
  }
}

void collect_columns(const AggregateExpression& a, std::vector<ColumnRef>& out) {
  if (a.arg) collect_columns(*a.arg, out);
}

void collect_columns(const Formula& f, std::vector<ColumnRef>& out) {
  switch (f.kind) {
    case Formula::Kind::Missing: add_unique(out, f.missing); return;
    case Formula::Kind::Predicate:
    case Formula::Kind::IsNull:
    case Formula::Kind::Membership:
      for (const auto& e : f.operands) collect_columns(e, out);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Not:
      for (const auto& c : f.children) collect_columns(c, out);
      return;
  }
}

std::size_t node_count(const Expression& e) {
  std::size_t n = 1;
  for (const auto& a : e.args) n += node_count(a);
  return n;
}

std::size_t node_count(const AggregateExpression& a) {
  return 1 + (a.arg ? node_count(*a.arg) : 0);
}

std::size_t node_count(const Formula& f) {
  std::size_t n = 1;
  if (f.kind == Formula::Kind::Missing) n += 1;  // the attribute reference
  for (const auto& e : f.operands) n += node_count(e);
  for (const auto& c : f.children) n += node_count(c);
  if (f.subquery) n += node_count(*f.subquery);
  return n;
}

std::size_t node_count(const Query& q) {
  std::size_t n = 1 + (q.star ? 1 : 0);
  for (const auto& s : q.select_exprs) n += node_count(s.expr);
  for (const auto& a : q.select_aggs) n += node_count(a.agg);
  n += q.from.size();
  if (q.where) n += node_count(*q.where);
  n += q.group_by.size();
  return n;
}

}  // namespace colsem

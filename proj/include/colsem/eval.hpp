#pragma once

#include <map>
#include <string>
#include <vector>

#include "colsem/ast.hpp"
#include "colsem/relation.hpp"

namespace colsem {

/// How predicates treat Null arguments.
///  - ThreeValued: UNKNOWN, connectives follow Kleene's tables.
///  - TwoValued: FALSE, so formulas never leave {TRUE, FALSE}.
///  - NullFree: Null anywhere in the input relations is an error; used to run
///    expanded queries over normalized relations.
enum class EvalMode { ThreeValued, TwoValued, NullFree };

std::string_view to_string(EvalMode mode);

TruthValue eval_predicate(CompareOp op, const Value& lhs, const Value& rhs, EvalMode mode);

/// TRUE iff v is Null; never UNKNOWN.
TruthValue eval_is_null(const Value& v);

/// Function application with strict Null propagation. Int op Int stays Int
/// (division truncates toward zero); any Float operand widens to Float.
Value apply_function(FunctionOp op, const Value& lhs, const Value& rhs);

using Binding = std::map<ColumnRef, Value>;

/// Evaluates an expression under a binding that covers all its columns.
Value eval_expression(const Expression& e, const Binding& binding);

/// Applies an aggregate to the per-group argument values. Any Null input
/// yields Null (COUNT included); COUNT(*) receives one placeholder per row and
/// never sees Nulls. An empty group gives COUNT = 0 and Null otherwise.
Value eval_aggregate(const AggregateExpression& g, const std::vector<Value>& inputs);

/// Nested-loop evaluation: product of the FROM relations, keep bindings where
/// the WHERE formula is exactly TRUE, then project or group and aggregate.
/// GROUP BY puts Nulls in one group. Under NullFree, an output row that would
/// hold a Null (an aggregate over an empty group) is omitted.
Relation run_query(const Query& q, const Database& db, EvalMode mode,
                   const std::string& result_name = "result");

}  // namespace colsem

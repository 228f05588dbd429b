#include "colsem/eval.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>

#include "colsem/error.hpp"
#include "colsem/sql.hpp"

namespace colsem {

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::ThreeValued: return "3vl";
    case EvalMode::TwoValued: return "2vl";
    case EvalMode::NullFree: return "null-free";
  }
  return "?";
}

namespace {

// -1, 0, 1 for two non-null values of comparable types.
int compare_values(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_int() && b.is_int()) return a.as_int() < b.as_int() ? -1 : a.as_int() > b.as_int();
    double x = a.as_number(), y = b.as_number();
    return x < y ? -1 : x > y;
  }
  if (a.is_str() && b.is_str()) {
    int c = a.as_str().compare(b.as_str());
    return c < 0 ? -1 : c > 0;
  }
  if (a.is_bool() && b.is_bool()) return static_cast<int>(a.as_bool()) - static_cast<int>(b.as_bool());
  throw Error(ErrorKind::TypeMismatch,
              "cannot compare " + a.debug_string() + " with " + b.debug_string());
}

bool compare_holds(CompareOp op, int c) {
  switch (op) {
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
    case CompareOp::Lt: return c < 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Gt: return c > 0;
    case CompareOp::Ge: return c >= 0;
  }
  return false;
}

TruthValue null_outcome(EvalMode mode) {
  switch (mode) {
    case EvalMode::ThreeValued: return TruthValue::Unknown;
    case EvalMode::TwoValued: return TruthValue::False;
    case EvalMode::NullFree: break;
  }
  throw Error(ErrorKind::NullInNullFreeMode, "Null reached a predicate in null-free mode");
}

template <typename Op>
std::int64_t checked(Op op, std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (op(a, b, &out)) throw Error(ErrorKind::TypeMismatch, "integer overflow");
  return out;
}

bool add_overflow(std::int64_t a, std::int64_t b, std::int64_t* out) { return __builtin_add_overflow(a, b, out); }
bool sub_overflow(std::int64_t a, std::int64_t b, std::int64_t* out) { return __builtin_sub_overflow(a, b, out); }
bool mul_overflow(std::int64_t a, std::int64_t b, std::int64_t* out) { return __builtin_mul_overflow(a, b, out); }

}  // namespace

TruthValue eval_predicate(CompareOp op, const Value& lhs, const Value& rhs, EvalMode mode) {
  if (lhs.is_null() || rhs.is_null()) return null_outcome(mode);
  return truth(compare_holds(op, compare_values(lhs, rhs)));
}

TruthValue eval_is_null(const Value& v) { return truth(v.is_null()); }

Value apply_function(FunctionOp op, const Value& l, const Value& r) {
  if (l.is_null() || r.is_null()) return Value::null();
  if (op == FunctionOp::Concat) {
    if (!l.is_str() || !r.is_str()) {
      throw Error(ErrorKind::TypeMismatch, "|| requires strings, got " + l.debug_string() +
                                               " and " + r.debug_string());
    }
    return Value::string(l.as_str() + r.as_str());
  }
  if (!l.is_numeric() || !r.is_numeric()) {
    throw Error(ErrorKind::TypeMismatch, std::string(symbol(op)) + " requires numbers, got " +
                                             l.debug_string() + " and " + r.debug_string());
  }
  if (l.is_int() && r.is_int()) {
    std::int64_t a = l.as_int(), b = r.as_int();
    switch (op) {
      case FunctionOp::Add: return Value::integer(checked(add_overflow, a, b));
      case FunctionOp::Sub: return Value::integer(checked(sub_overflow, a, b));
      case FunctionOp::Mul: return Value::integer(checked(mul_overflow, a, b));
      case FunctionOp::Div:
        if (b == 0) throw Error(ErrorKind::DivisionByZero, "division by zero");
        if (a == INT64_MIN && b == -1) throw Error(ErrorKind::TypeMismatch, "integer overflow");
        return Value::integer(a / b);
      case FunctionOp::Concat: break;
    }
  }
  double a = l.as_number(), b = r.as_number();
  switch (op) {
    case FunctionOp::Add: return Value::real(a + b);
    case FunctionOp::Sub: return Value::real(a - b);
    case FunctionOp::Mul: return Value::real(a * b);
    case FunctionOp::Div:
      if (b == 0) throw Error(ErrorKind::DivisionByZero, "division by zero");
      return Value::real(a / b);
    case FunctionOp::Concat: break;
  }
  return Value::null();
}

Value eval_expression(const Expression& e, const Binding& binding) {
  switch (e.kind) {
    case Expression::Kind::Constant:
      return e.constant;
    case Expression::Kind::Column: {
      auto it = binding.find(e.column);
      if (it == binding.end()) {
        throw Error(ErrorKind::UnresolvedColumn,
                    "no value bound for " + e.column.table + "." + e.column.attribute);
      }
      return it->second;
    }
    case Expression::Kind::Function:
      return apply_function(e.op, eval_expression(e.args.at(0), binding),
                            eval_expression(e.args.at(1), binding));
  }
  return Value::null();
}

Value eval_aggregate(const AggregateExpression& g, const std::vector<Value>& inputs) {
  if (g.star) return Value::integer(static_cast<std::int64_t>(inputs.size()));
  for (const Value& v : inputs) {
    if (v.is_null()) return Value::null();
  }
  if (g.func == AggregateFunc::Count) return Value::integer(static_cast<std::int64_t>(inputs.size()));
  if (inputs.empty()) return Value::null();
  switch (g.func) {
    case AggregateFunc::Sum:
    case AggregateFunc::Avg: {
      bool all_int = true;
      for (const Value& v : inputs) {
        if (!v.is_numeric()) {
          throw Error(ErrorKind::TypeMismatch,
                      std::string(to_string(g.func)) + " over non-numeric " + v.debug_string());
        }
        all_int = all_int && v.is_int();
      }
      if (all_int) {
        std::int64_t sum = 0;
        for (const Value& v : inputs) {
          sum = checked(add_overflow, sum, v.as_int());
        }
        if (g.func == AggregateFunc::Sum) return Value::integer(sum);
        return Value::real(static_cast<double>(sum) / static_cast<double>(inputs.size()));
      }
      double sum = 0;
      for (const Value& v : inputs) sum += v.as_number();
      if (g.func == AggregateFunc::Sum) return Value::real(sum);
      return Value::real(sum / static_cast<double>(inputs.size()));
    }
    case AggregateFunc::Min:
    case AggregateFunc::Max: {
      Value best = inputs.front();
      for (const Value& v : inputs) {
        int c = compare_values(v, best);
        if (g.func == AggregateFunc::Min ? c < 0 : c > 0) best = v;
      }
      return best;
    }
    case AggregateFunc::Count: break;
  }
  return Value::null();
}

namespace {

struct Slot {
  std::size_t table = 0;
  std::size_t column = 0;
};

struct CompiledExpr {
  Expression::Kind kind = Expression::Kind::Constant;
  Value constant;
  Slot slot;
  FunctionOp op = FunctionOp::Add;
  std::vector<CompiledExpr> args;
  int max_table = -1;
};

using Rows = std::vector<const Row*>;

Value eval(const CompiledExpr& e, const Rows& rows) {
  switch (e.kind) {
    case Expression::Kind::Constant: return e.constant;
    case Expression::Kind::Column: return (*rows[e.slot.table])[e.slot.column];
    case Expression::Kind::Function:
      return apply_function(e.op, eval(e.args[0], rows), eval(e.args[1], rows));
  }
  return Value::null();
}

struct SubqueryResult {
  std::vector<Row> rows;
  std::set<Row> distinct;
};

struct CompiledFormula {
  Formula::Kind kind = Formula::Kind::Predicate;
  CompareOp op = CompareOp::Eq;
  std::vector<CompiledExpr> operands;
  std::shared_ptr<const SubqueryResult> sub;
  bool negated = false;
  std::vector<CompiledFormula> children;
  int max_table = -1;
};

class Evaluator {
 public:
  Evaluator(const Query& q, const Database& db, EvalMode mode)
      : db_(db), catalog_(db.catalog()), mode_(mode), query_(bind(q, catalog_)) {
    for (const auto& t : query_.from) {
      const Relation& r = db_.at(t.name);
      if (mode_ == EvalMode::NullFree) require_null_free(r);
      tables_.push_back(&r);
      bindings_.push_back(t.binding());
    }
  }

  Relation run(const std::string& name) {
    Relation out(name, output_schema(query_, catalog_));
    std::vector<CompiledExpr> select;
    for (const auto& s : query_.select_exprs) select.push_back(compile(s.expr));
    std::vector<CompiledFormula> conjuncts;
    if (query_.where) {
      std::vector<Formula> parts;
      collect_conjuncts(*query_.where, parts);
      for (const auto& p : parts) conjuncts.push_back(compile(p));
    }
    by_level_.assign(tables_.size() + 1, {});
    for (auto& c : conjuncts) by_level_[static_cast<std::size_t>(c.max_table + 1)].push_back(&c);

    std::vector<std::pair<Rows, std::vector<std::size_t>>> survivors;
    Rows rows(tables_.size(), nullptr);
    std::vector<std::size_t> index(tables_.size(), 0);
    std::function<void(std::size_t)> walk = [&](std::size_t k) {
      if (!holds(by_level_[k], rows, index)) return;
      if (k == tables_.size()) {
        survivors.emplace_back(rows, index);
        return;
      }
      const auto& data = tables_[k]->rows();
      for (std::size_t i = 0; i < data.size(); ++i) {
        rows[k] = &data[i];
        index[k] = i;
        walk(k + 1);
      }
      rows[k] = nullptr;
    };
    walk(0);

    if (!query_.is_aggregate()) {
      for (const auto& [r, idx] : survivors) {
        Row row;
        guarded(idx, [&] {
          for (const auto& e : select) row.push_back(eval(e, r));
        });
        emit(out, std::move(row));
      }
      return out;
    }

    std::vector<CompiledExpr> keys;
    for (const auto& g : query_.group_by) keys.push_back(compile(Expression::column_of(g)));
    std::vector<std::optional<CompiledExpr>> agg_args;
    for (const auto& a : query_.select_aggs) {
      agg_args.push_back(a.agg.arg ? std::optional(compile(*a.agg.arg)) : std::nullopt);
    }
    std::map<Row, std::size_t> group_index;
    std::vector<std::vector<std::size_t>> groups;
    if (keys.empty()) groups.emplace_back();
    for (std::size_t s = 0; s < survivors.size(); ++s) {
      if (keys.empty()) {
        groups[0].push_back(s);
        continue;
      }
      Row key;
      for (const auto& k : keys) key.push_back(eval(k, survivors[s].first));
      auto [it, inserted] = group_index.emplace(std::move(key), groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(s);
    }
    Rows no_rows(tables_.size(), nullptr);
    for (const auto& members : groups) {
      const Rows& sample = members.empty() ? no_rows : survivors[members.front()].first;
      Row row;
      guarded(members.empty() ? std::vector<std::size_t>{} : survivors[members.front()].second,
              [&] {
                for (const auto& e : select) row.push_back(eval(e, sample));
              });
      for (std::size_t a = 0; a < query_.select_aggs.size(); ++a) {
        std::vector<Value> inputs;
        inputs.reserve(members.size());
        for (std::size_t s : members) {
          guarded(survivors[s].second, [&] {
            inputs.push_back(agg_args[a] ? eval(*agg_args[a], survivors[s].first) : Value::null());
          });
        }
        row.push_back(eval_aggregate(query_.select_aggs[a].agg, inputs));
      }
      emit(out, std::move(row));
    }
    return out;
  }

 private:
  static void require_null_free(const Relation& r) {
    for (std::size_t i = 0; i < r.rows().size(); ++i) {
      for (const Value& v : r.rows()[i]) {
        if (v.is_null()) {
          throw Error(ErrorKind::NullInNullFreeMode, "relation " + r.name() + " row " +
                                                         std::to_string(i + 1) + " holds a Null");
        }
      }
    }
  }

  void emit(Relation& out, Row row) {
    if (mode_ == EvalMode::NullFree &&
        std::any_of(row.begin(), row.end(), [](const Value& v) { return v.is_null(); })) {
      return;
    }
    out.add_row(std::move(row));
  }

  template <typename F>
  void guarded(const std::vector<std::size_t>& index, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      std::string where = " [at";
      for (std::size_t t = 0; t < index.size() && t < bindings_.size(); ++t) {
        where += " " + bindings_[t] + "#" + std::to_string(index[t] + 1);
      }
      throw Error(e.kind(), std::string(e.what()) + where + "]");
    }
  }

  Slot resolve(const ColumnRef& ref) const {
    for (std::size_t t = 0; t < bindings_.size(); ++t) {
      if (bindings_[t] == ref.table) {
        if (auto c = tables_[t]->column_index(ref.attribute)) return Slot{t, *c};
      }
    }
    throw Error(ErrorKind::UnresolvedColumn, "cannot resolve " + ref.table + "." + ref.attribute);
  }

  CompiledExpr compile(const Expression& e) const {
    CompiledExpr c;
    c.kind = e.kind;
    c.constant = e.constant;
    c.op = e.op;
    if (e.kind == Expression::Kind::Column) {
      c.slot = resolve(e.column);
      c.max_table = static_cast<int>(c.slot.table);
    }
    for (const auto& a : e.args) {
      c.args.push_back(compile(a));
      c.max_table = std::max(c.max_table, c.args.back().max_table);
    }
    return c;
  }

  CompiledFormula compile(const Formula& f) const {
    CompiledFormula c;
    c.kind = f.kind;
    c.op = f.op;
    c.negated = f.negated;
    if (f.kind == Formula::Kind::Missing) {
      throw Error(ErrorKind::Dialect,
                  "MISSING must be expanded or compiled before running a query");
    }
    for (const auto& e : f.operands) {
      c.operands.push_back(compile(e));
      c.max_table = std::max(c.max_table, c.operands.back().max_table);
    }
    for (const auto& ch : f.children) {
      c.children.push_back(compile(ch));
      c.max_table = std::max(c.max_table, c.children.back().max_table);
    }
    if (f.subquery) {
      auto result = std::make_shared<SubqueryResult>();
      Relation r = run_query(*f.subquery, db_, mode_, "subquery");
      result->rows = r.rows();
      result->distinct.insert(r.rows().begin(), r.rows().end());
      c.sub = std::move(result);
    }
    return c;
  }

  bool holds(const std::vector<const CompiledFormula*>& fs, const Rows& rows,
             const std::vector<std::size_t>& index) {
    for (const CompiledFormula* f : fs) {
      TruthValue t = TruthValue::False;
      guarded(index, [&] { t = truth_of(*f, rows); });
      if (t != TruthValue::True) return false;
    }
    return true;
  }

  TruthValue membership(const CompiledFormula& f, const Rows& rows) const {
    Row tuple;
    for (const auto& e : f.operands) tuple.push_back(eval(e, rows));
    bool has_null = std::any_of(tuple.begin(), tuple.end(), [](const Value& v) { return v.is_null(); });
    if (!has_null && f.sub->distinct.count(tuple)) return TruthValue::True;
    if (mode_ == EvalMode::NullFree) {
      if (has_null) null_outcome(mode_);
      return TruthValue::False;
    }
    // Row-wise SQL comparison: some row definitely equal -> TRUE; otherwise
    // UNKNOWN if any row could be equal once Nulls are resolved.
    TruthValue result = TruthValue::False;
    for (const Row& candidate : f.sub->rows) {
      TruthValue eq = TruthValue::True;
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        eq = kleene_and(eq, eval_predicate(CompareOp::Eq, tuple[i], candidate[i],
                                           EvalMode::ThreeValued));
      }
      result = kleene_or(result, eq);
      if (result == TruthValue::True) break;
    }
    if (mode_ == EvalMode::TwoValued && result == TruthValue::Unknown) return TruthValue::False;
    return result;
  }

  TruthValue truth_of(const CompiledFormula& f, const Rows& rows) const {
    switch (f.kind) {
      case Formula::Kind::Predicate:
        return eval_predicate(f.op, eval(f.operands[0], rows), eval(f.operands[1], rows), mode_);
      case Formula::Kind::IsNull:
        return eval_is_null(eval(f.operands[0], rows));
      case Formula::Kind::Membership: {
        TruthValue in = membership(f, rows);
        return f.negated ? kleene_not(in) : in;
      }
      case Formula::Kind::And: {
        TruthValue l = truth_of(f.children[0], rows);
        if (l == TruthValue::False) return l;
        return kleene_and(l, truth_of(f.children[1], rows));
      }
      case Formula::Kind::Or: {
        TruthValue l = truth_of(f.children[0], rows);
        if (l == TruthValue::True) return l;
        return kleene_or(l, truth_of(f.children[1], rows));
      }
      case Formula::Kind::Not:
        return kleene_not(truth_of(f.children[0], rows));
      case Formula::Kind::Missing:
        break;
    }
    throw Error(ErrorKind::Dialect, "MISSING cannot be evaluated directly");
  }

  const Database& db_;
  Catalog catalog_;
  EvalMode mode_;
  Query query_;
  std::vector<const Relation*> tables_;
  std::vector<std::string> bindings_;
  std::vector<std::vector<const CompiledFormula*>> by_level_;
};

}  // namespace

Relation run_query(const Query& q, const Database& db, EvalMode mode,
                   const std::string& result_name) {
  Evaluator evaluator(q, db, mode);
  return evaluator.run(result_name);
}

}  // namespace colsem

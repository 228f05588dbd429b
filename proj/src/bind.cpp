#include <algorithm>
#include <set>

#include "colsem/error.hpp"
#include "colsem/sql.hpp"

namespace colsem {
namespace {

struct Scope {
  struct Entry {
    std::string binding;
    const Schema* schema;
  };
  std::vector<Entry> entries;

  const Entry* find(std::string_view binding) const {
    for (const auto& e : entries) {
      if (e.binding == binding) return &e;
    }
    return nullptr;
  }
};

Scope make_scope(const Query& q, const Catalog& catalog) {
  Scope scope;
  for (const auto& t : q.from) {
    const Schema* schema = catalog.find(t.name);
    if (!schema) throw Error(ErrorKind::UnknownTable, "unknown table " + t.name);
    if (scope.find(t.binding())) {
      throw Error(ErrorKind::InvalidQuery, "duplicate FROM entry " + t.binding());
    }
    scope.entries.push_back({t.binding(), schema});
  }
  return scope;
}

const Column* find_column(const Schema& schema, std::string_view attribute) {
  for (const auto& c : schema) {
    if (c.name == attribute) return &c;
  }
  return nullptr;
}

ColumnRef resolve(const ColumnRef& ref, const Scope& scope) {
  if (!ref.table.empty()) {
    const Scope::Entry* entry = scope.find(ref.table);
    if (!entry) {
      throw Error(ErrorKind::UnresolvedColumn,
                  "column " + ref.table + "." + ref.attribute + " does not match any FROM entry");
    }
    if (!find_column(*entry->schema, ref.attribute)) {
      throw Error(ErrorKind::UnknownAttribute,
                  "relation bound as " + ref.table + " has no attribute " + ref.attribute);
    }
    return ref;
  }
  const Scope::Entry* match = nullptr;
  for (const auto& e : scope.entries) {
    if (find_column(*e.schema, ref.attribute)) {
      if (match) {
        throw Error(ErrorKind::UnresolvedColumn, "column " + ref.attribute + " is ambiguous (" +
                                                     match->binding + ", " + e.binding + ")");
      }
      match = &e;
    }
  }
  if (!match) {
    throw Error(ErrorKind::UnresolvedColumn,
                "column " + ref.attribute + " does not match any FROM entry");
  }
  return ColumnRef{match->binding, ref.attribute};
}

Expression resolve(const Expression& e, const Scope& scope) {
  Expression out = e;
  if (e.kind == Expression::Kind::Column) out.column = resolve(e.column, scope);
  for (auto& a : out.args) a = resolve(a, scope);
  return out;
}

ColumnType column_type(const ColumnRef& ref, const Scope& scope) {
  const Scope::Entry* entry = scope.find(ref.table);
  return find_column(*entry->schema, ref.attribute)->type;
}

bool numeric(ColumnType t) { return t == ColumnType::Int || t == ColumnType::Float; }

ColumnType type_of(const Expression& e, const Scope& scope) {
  switch (e.kind) {
    case Expression::Kind::Constant:
      if (e.constant.is_null()) throw Error(ErrorKind::TypeMismatch, "untyped NULL constant");
      return e.constant.type();
    case Expression::Kind::Column:
      return column_type(e.column, scope);
    case Expression::Kind::Function: {
      ColumnType l = type_of(e.args.at(0), scope);
      ColumnType r = type_of(e.args.at(1), scope);
      if (e.op == FunctionOp::Concat) {
        if (l != ColumnType::Str || r != ColumnType::Str) {
          throw Error(ErrorKind::TypeMismatch, "|| requires string operands");
        }
        return ColumnType::Str;
      }
      if (!numeric(l) || !numeric(r)) {
        throw Error(ErrorKind::TypeMismatch,
                    std::string(symbol(e.op)) + " requires numeric operands");
      }
      return (l == ColumnType::Float || r == ColumnType::Float) ? ColumnType::Float
                                                                : ColumnType::Int;
    }
  }
  return ColumnType::Int;
}

void check_comparable(ColumnType l, ColumnType r, std::string_view what) {
  if (l == r || (numeric(l) && numeric(r))) return;
  throw Error(ErrorKind::TypeMismatch, "cannot compare " + std::string(to_string(l)) + " with " +
                                           std::string(to_string(r)) + " in " + std::string(what));
}

ColumnType aggregate_type(const AggregateExpression& a, const Scope& scope) {
  if (a.star) return ColumnType::Int;
  ColumnType arg = type_of(*a.arg, scope);
  switch (a.func) {
    case AggregateFunc::Count: return ColumnType::Int;
    case AggregateFunc::Sum:
      if (!numeric(arg)) throw Error(ErrorKind::TypeMismatch, "SUM requires a numeric argument");
      return arg;
    case AggregateFunc::Avg:
      if (!numeric(arg)) throw Error(ErrorKind::TypeMismatch, "AVG requires a numeric argument");
      return ColumnType::Float;
    case AggregateFunc::Min:
    case AggregateFunc::Max:
      return arg;
  }
  return arg;
}

Query bind_query(const Query& q, const Catalog& catalog);

Formula resolve(const Formula& f, const Scope& scope, const Catalog& catalog) {
  Formula out = f;
  switch (f.kind) {
    case Formula::Kind::Missing: {
      const Scope::Entry* entry = scope.find(f.missing.table);
      if (!entry) {
        throw Error(ErrorKind::UnresolvedColumn,
                    "MISSING refers to " + f.missing.table + ", which is not a FROM entry");
      }
      if (!find_column(*entry->schema, f.missing.attribute)) {
        throw Error(ErrorKind::UnknownAttribute,
                    "relation bound as " + f.missing.table + " has no attribute " +
                        f.missing.attribute);
      }
      return out;
    }
    case Formula::Kind::Predicate:
      for (auto& e : out.operands) e = resolve(e, scope);
      check_comparable(type_of(out.operands[0], scope), type_of(out.operands[1], scope),
                       "predicate");
      return out;
    case Formula::Kind::IsNull:
      out.operands[0] = resolve(out.operands[0], scope);
      type_of(out.operands[0], scope);
      return out;
    case Formula::Kind::Membership: {
      for (auto& e : out.operands) e = resolve(e, scope);
      Query sub = bind_query(*f.subquery, catalog);
      if (sub.select_aggs.size() + sub.select_exprs.size() != out.operands.size()) {
        throw Error(ErrorKind::InvalidQuery, "IN subquery arity does not match its operand tuple");
      }
      if (!sub.select_aggs.empty() || !sub.group_by.empty()) {
        throw Error(ErrorKind::InvalidQuery, "IN subqueries may not aggregate");
      }
      Scope sub_scope = make_scope(sub, catalog);
      for (std::size_t i = 0; i < out.operands.size(); ++i) {
        check_comparable(type_of(out.operands[i], scope),
                         type_of(sub.select_exprs[i].expr, sub_scope), "IN");
      }
      out.subquery = std::make_shared<const Query>(std::move(sub));
      return out;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Not:
      for (auto& c : out.children) c = resolve(c, scope, catalog);
      return out;
  }
  return out;
}

Query bind_query(const Query& q, const Catalog& catalog) {
  Scope scope = make_scope(q, catalog);
  Query out;
  out.from = q.from;
  if (q.star) {
    for (const auto& entry : scope.entries) {
      for (const auto& c : *entry.schema) {
        out.select_exprs.push_back({Expression::column_of(entry.binding, c.name), std::nullopt});
      }
    }
  } else {
    for (const auto& s : q.select_exprs) {
      out.select_exprs.push_back({resolve(s.expr, scope), s.alias});
      type_of(out.select_exprs.back().expr, scope);
    }
  }
  for (const auto& a : q.select_aggs) {
    AggregateItem item = a;
    if (item.agg.star && (item.agg.func != AggregateFunc::Count || item.agg.arg)) {
      throw Error(ErrorKind::InvalidQuery, "only COUNT(*) may use *");
    }
    if (!item.agg.star && !item.agg.arg) {
      throw Error(ErrorKind::InvalidQuery, "aggregate without argument");
    }
    if (item.agg.arg) item.agg.arg = resolve(*item.agg.arg, scope);
    aggregate_type(item.agg, scope);
    out.select_aggs.push_back(std::move(item));
  }
  if (q.where) out.where = resolve(*q.where, scope, catalog);
  for (const auto& g : q.group_by) out.group_by.push_back(resolve(g, scope));
  if (out.is_aggregate()) {
    for (const auto& s : out.select_exprs) {
      std::vector<ColumnRef> refs;
      collect_columns(s.expr, refs);
      for (const auto& r : refs) {
        if (std::find(out.group_by.begin(), out.group_by.end(), r) == out.group_by.end()) {
          throw Error(ErrorKind::InvalidQuery, "column " + r.table + "." + r.attribute +
                                                   " must appear in GROUP BY");
        }
      }
    }
  }
  return out;
}

std::string default_name(const Expression& e) {
  return e.kind == Expression::Kind::Column ? e.column.attribute : "expr";
}

std::string default_name(const AggregateExpression& a) {
  std::string func(to_string(a.func));
  std::transform(func.begin(), func.end(), func.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (a.arg && a.arg->kind == Expression::Kind::Column) return func + "_" + a.arg->column.attribute;
  return func;
}

}  // namespace

Query bind(const Query& q, const Catalog& catalog) { return bind_query(q, catalog); }

ColumnType expression_type(const Expression& e, const Query& bound, const Catalog& catalog) {
  return type_of(e, make_scope(bound, catalog));
}

Schema output_schema(const Query& bound, const Catalog& catalog) {
  Scope scope = make_scope(bound, catalog);
  Schema schema;
  std::set<std::string> used;
  auto add = [&](std::string name, ColumnType type) {
    std::string unique = name;
    for (int n = 2; used.count(unique); ++n) unique = name + "_" + std::to_string(n);
    used.insert(unique);
    schema.push_back({unique, type});
  };
  for (const auto& s : bound.select_exprs) {
    add(s.alias.value_or(default_name(s.expr)), type_of(s.expr, scope));
  }
  for (const auto& a : bound.select_aggs) {
    add(a.alias.value_or(default_name(a.agg)), aggregate_type(a.agg, scope));
  }
  return schema;
}

}  // namespace colsem

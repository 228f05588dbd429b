#include "colsem/expander.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "colsem/error.hpp"
#include "colsem/eval.hpp"
#include "colsem/sql.hpp"

namespace colsem {
namespace {

bool contains(const std::vector<ColumnRef>& refs, const ColumnRef& r) {
  return std::find(refs.begin(), refs.end(), r) != refs.end();
}

void add_unique(std::vector<ColumnRef>& refs, const ColumnRef& r) {
  if (!contains(refs, r)) refs.push_back(r);
}

std::string key_binding(const std::string& binding) { return binding + "_id"; }
std::string attr_binding(const ColumnRef& r) { return r.table + "_" + r.attribute; }

ColumnRef id_of(const std::string& binding) { return {key_binding(binding), "id"}; }
ColumnRef id_of(const ColumnRef& attr) { return {attr_binding(attr), "id"}; }

class Names {
 public:
  explicit Names(const std::vector<TableRef>& from) {
    for (const auto& t : from) base_[t.binding()] = t.name;
  }

  const std::string& base(const std::string& binding) const {
    auto it = base_.find(binding);
    if (it == base_.end()) throw Error(ErrorKind::UnresolvedColumn, "unknown binding " + binding);
    return it->second;
  }

  TableRef key_entry(const std::string& binding) const {
    return entry(base(binding) + "_id", key_binding(binding));
  }

  TableRef attr_entry(const ColumnRef& r) const {
    return entry(base(r.table) + "_" + r.attribute, attr_binding(r));
  }

 private:
  static TableRef entry(std::string relation, std::string binding) {
    TableRef t{std::move(relation), std::nullopt};
    if (t.name != binding) t.alias = std::move(binding);
    return t;
  }

  std::map<std::string, std::string> base_;
};

Formula correlation(const ColumnRef& attr) {
  return Formula::predicate(CompareOp::Eq, Expression::column_of(id_of(attr.table)),
                            Expression::column_of(id_of(attr)));
}

Formula rename_formula(const Formula& f) {
  Formula out = f;
  for (auto& e : out.operands) e = rename(e);
  for (auto& c : out.children) c = rename_formula(c);
  return out;
}

Query missing_subquery(const ColumnRef& attr, const Names& names) {
  Query sub;
  sub.select_exprs.push_back({Expression::column_of(id_of(attr)), std::nullopt});
  sub.from.push_back(names.attr_entry(attr));
  return sub;
}

Formula presence_test(const ColumnRef& attr, const Names& names, bool present) {
  return Formula::membership({Expression::column_of(id_of(attr.table))},
                             missing_subquery(attr, names), !present);
}

std::vector<std::string> tables_of(const std::vector<ColumnRef>& attrs) {
  std::vector<std::string> tables;
  for (const auto& a : attrs) {
    if (std::find(tables.begin(), tables.end(), a.table) == tables.end()) tables.push_back(a.table);
  }
  return tables;
}

// `(ids of the literal's tables) IN (SELECT ... WHERE literal)`, with the
// literal evaluated over its own attribute relations.
Formula membership_literal(const Formula& literal, const std::vector<ColumnRef>& attrs,
                           const Names& names) {
  Query sub;
  std::vector<Formula> where;
  std::vector<Expression> tuple;
  for (const auto& table : tables_of(attrs)) {
    const ColumnRef* first = nullptr;
    for (const auto& a : attrs) {
      if (a.table != table) continue;
      sub.from.push_back(names.attr_entry(a));
      if (!first) {
        first = &a;
        sub.select_exprs.push_back({Expression::column_of(id_of(a)), std::nullopt});
      } else {
        where.push_back(Formula::predicate(CompareOp::Eq, Expression::column_of(id_of(*first)),
                                           Expression::column_of(id_of(a))));
      }
    }
    tuple.push_back(Expression::column_of(id_of(table)));
  }
  where.push_back(rename_formula(literal));
  sub.where = conjoin(std::move(where));
  return Formula::membership(std::move(tuple), std::move(sub), false);
}

Formula nnf(const Formula& f, bool negate) {
  switch (f.kind) {
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      Formula l = nnf(f.lhs(), negate);
      Formula r = nnf(f.rhs(), negate);
      bool conj = (f.kind == Formula::Kind::And) != negate;
      return conj ? Formula::conj(std::move(l), std::move(r))
                  : Formula::disj(std::move(l), std::move(r));
    }
    case Formula::Kind::Not:
      return nnf(f.children[0], !negate);
    case Formula::Kind::Membership: {
      Formula out = f;
      if (negate) out.negated = !out.negated;
      return out;
    }
    default:
      return negate ? Formula::negation(f) : f;
  }
}

std::vector<ColumnRef> required(const Formula& f) {
  std::vector<ColumnRef> out;
  switch (f.kind) {
    case Formula::Kind::Predicate:
      collect_columns(f, out);
      return out;
    case Formula::Kind::Not:
      if (f.children[0].kind == Formula::Kind::Predicate ||
          f.children[0].kind == Formula::Kind::Missing) {
        collect_columns(f.children[0], out);
      }
      return out;
    case Formula::Kind::And:
      out = required(f.lhs());
      for (const auto& r : required(f.rhs())) add_unique(out, r);
      return out;
    case Formula::Kind::Or: {
      std::vector<ColumnRef> rhs = required(f.rhs());
      for (const auto& r : required(f.lhs())) {
        if (contains(rhs, r)) out.push_back(r);
      }
      return out;
    }
    default:
      return out;
  }
}

Formula expand_nnf(const Formula& f, const Names& names, const std::vector<ColumnRef>& present) {
  switch (f.kind) {
    case Formula::Kind::And:
      return Formula::conj(expand_nnf(f.lhs(), names, present),
                           expand_nnf(f.rhs(), names, present));
    case Formula::Kind::Or:
      return Formula::disj(expand_nnf(f.lhs(), names, present),
                           expand_nnf(f.rhs(), names, present));
    case Formula::Kind::Missing:
      return presence_test(f.missing, names, false);
    case Formula::Kind::IsNull:
      throw Error(ErrorKind::Dialect, "IS NULL is not part of the columnar dialect");
    case Formula::Kind::Membership:
      throw Error(ErrorKind::InvalidQuery, "IN subqueries are not supported in columnar queries");
    case Formula::Kind::Not:
      if (f.children[0].kind == Formula::Kind::Missing) {
        return presence_test(f.children[0].missing, names, true);
      }
      if (f.children[0].kind == Formula::Kind::IsNull) {
        throw Error(ErrorKind::Dialect, "IS NULL is not part of the columnar dialect");
      }
      break;
    case Formula::Kind::Predicate:
      break;
  }
  std::vector<ColumnRef> attrs;
  collect_columns(f, attrs);
  bool all_present = std::all_of(attrs.begin(), attrs.end(),
                                 [&](const ColumnRef& a) { return contains(present, a); });
  if (all_present) return rename_formula(f);
  return membership_literal(f, attrs, names);
}

Formula disjoin(std::vector<Formula> parts) {
  Formula out = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) out = Formula::disj(std::move(out), std::move(parts[i]));
  return out;
}

Formula simulate_nnf(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::And:
      return Formula::conj(simulate_nnf(f.lhs()), simulate_nnf(f.rhs()));
    case Formula::Kind::Or:
      return Formula::disj(simulate_nnf(f.lhs()), simulate_nnf(f.rhs()));
    case Formula::Kind::Not: {
      if (f.children[0].kind != Formula::Kind::Predicate) return f;
      std::vector<ColumnRef> attrs;
      collect_columns(f, attrs);
      std::vector<Formula> parts;
      for (const auto& a : attrs) parts.push_back(Formula::missing_of(a.table, a.attribute));
      parts.push_back(f);
      return disjoin(std::move(parts));
    }
    default:
      return f;
  }
}

Formula isnull_rewrite(const Formula& f) {
  if (f.kind == Formula::Kind::IsNull) {
    std::vector<ColumnRef> attrs;
    collect_columns(f.operands[0], attrs);
    if (attrs.empty()) {
      return Formula::predicate(CompareOp::Eq, Expression::constant_of(Value::integer(1)),
                                Expression::constant_of(Value::integer(0)));
    }
    std::vector<Formula> parts;
    for (const auto& a : attrs) parts.push_back(Formula::missing_of(a.table, a.attribute));
    return disjoin(std::move(parts));
  }
  Formula out = f;
  for (auto& c : out.children) c = isnull_rewrite(c);
  return out;
}

Formula missing_to_isnull(const Formula& f) {
  if (f.kind == Formula::Kind::IsNull) {
    throw Error(ErrorKind::Dialect, "IS NULL is not part of the columnar dialect");
  }
  if (f.kind == Formula::Kind::Missing) {
    return Formula::is_null(Expression::column_of(f.missing));
  }
  Formula out = f;
  for (auto& c : out.children) c = missing_to_isnull(c);
  return out;
}

// FROM, correlation predicates and filters shared by the queries of a branch.
struct Core {
  const Names* names = nullptr;
  std::vector<TableRef> from;
  std::vector<std::string> bindings;  // parallel to from: the original binding
  std::vector<Formula> correlations;
  std::vector<ColumnRef> present;
  std::vector<Formula> filters;

  void add_table(const std::string& binding) {
    from.push_back(names->key_entry(binding));
    bindings.push_back(binding);
  }

  void add_attr(const ColumnRef& attr) {
    if (contains(present, attr)) return;
    present.push_back(attr);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < bindings.size(); ++i) {
      if (bindings[i] == attr.table) pos = i + 1;
    }
    from.insert(from.begin() + static_cast<std::ptrdiff_t>(pos), names->attr_entry(attr));
    bindings.insert(bindings.begin() + static_cast<std::ptrdiff_t>(pos), attr.table);
    correlations.push_back(correlation(attr));
  }

  Query query(std::vector<SelectItem> select, std::vector<Formula> extra = {}) const {
    Query q;
    q.select_exprs = std::move(select);
    q.from = from;
    std::vector<Formula> where = correlations;
    where.insert(where.end(), filters.begin(), filters.end());
    for (auto& e : extra) where.push_back(std::move(e));
    q.where = conjoin(std::move(where));
    return q;
  }
};

std::vector<SelectItem> select_of(const std::vector<ColumnRef>& refs) {
  std::vector<SelectItem> out;
  for (const auto& r : refs) out.push_back({Expression::column_of(r), std::nullopt});
  return out;
}

void check_generated_names(const Query& q, const Catalog& catalog) {
  std::map<std::string, std::string> seen;
  auto claim = [&](const std::string& name, const std::string& origin) {
    auto [it, inserted] = seen.emplace(name, origin);
    if (!inserted && it->second != origin) {
      throw Error(ErrorKind::NameCollision, "generated name " + name + " is produced by both " +
                                                it->second + " and " + origin);
    }
  };
  for (const auto& t : q.from) {
    const Schema* schema = catalog.find(t.name);
    claim(key_binding(t.binding()), t.binding() + " (key)");
    for (const auto& c : *schema) claim(attr_binding({t.binding(), c.name}), t.binding() + "." + c.name);
  }
}

}  // namespace

std::vector<ColumnRef> ids(const std::vector<TableRef>& tables) {
  std::vector<ColumnRef> out;
  for (const auto& t : tables) out.push_back(id_of(t.binding()));
  return out;
}

ColumnRef rename(const ColumnRef& ref) { return {attr_binding(ref), ref.attribute}; }

Expression rename(const Expression& e) {
  Expression out = e;
  if (e.kind == Expression::Kind::Column) out.column = rename(e.column);
  for (auto& a : out.args) a = rename(a);
  return out;
}

AggregateExpression rename(const AggregateExpression& a) {
  AggregateExpression out = a;
  if (out.arg) out.arg = rename(*out.arg);
  return out;
}

std::vector<ColumnRef> rename(const std::vector<ColumnRef>& refs) {
  std::vector<ColumnRef> out;
  for (const auto& r : refs) out.push_back(rename(r));
  return out;
}

Formula desugar_missing(const Formula& f, const std::vector<TableRef>& from) {
  if (f.kind == Formula::Kind::Missing) return presence_test(f.missing, Names(from), false);
  Formula out = f;
  for (auto& c : out.children) c = desugar_missing(c, from);
  return out;
}

Formula to_nnf(const Formula& f) { return nnf(f, false); }

Formula simulate_2vl_negation(const Formula& f) { return simulate_nnf(to_nnf(f)); }

Query simulate_2vl(const Query& q) {
  Query out = q;
  if (out.where) out.where = simulate_2vl_negation(*out.where);
  return out;
}

Query isnull_to_missing(const Query& q) {
  Query out = q;
  if (out.where) out.where = isnull_rewrite(*out.where);
  return out;
}

std::vector<ColumnRef> required_attributes(const Formula& f) { return required(f); }

Formula expand_formula(const Formula& f, const std::vector<TableRef>& from,
                       const std::vector<ColumnRef>& present) {
  return expand_nnf(to_nnf(f), Names(from), present);
}

ExpandedQuerySet expand(const Query& q, const Catalog& catalog) {
  ExpandedQuerySet set;
  set.source = bind(q, catalog);
  const Query& src = set.source;
  if (src.from.empty()) throw Error(ErrorKind::InvalidQuery, "columnar queries need a FROM clause");
  check_generated_names(src, catalog);
  set.output_schema = output_schema(src, catalog);
  set.aggregate = src.is_aggregate();
  set.table_count = src.from.size();
  set.constants.assign(src.output_arity(), std::nullopt);

  Names names(src.from);
  std::optional<Formula> nnf_where;
  std::vector<ColumnRef> hoisted;
  if (src.where) {
    nnf_where = to_nnf(*src.where);
    hoisted = required(*nnf_where);
  }

  Core base;
  base.names = &names;
  for (const auto& t : src.from) base.add_table(t.binding());
  for (const auto& a : hoisted) base.add_attr(a);
  if (nnf_where) base.filters.push_back(expand_nnf(*nnf_where, names, base.present));
  const std::vector<ColumnRef> id_refs = ids(src.from);

  if (!set.aggregate) {
    ExpansionBranch branch;
    branch.description = "all rows";
    branch.key = base.query(select_of(id_refs));
    for (std::size_t i = 0; i < src.select_exprs.size(); ++i) {
      const Expression& e = src.select_exprs[i].expr;
      Core member = base;
      std::vector<ColumnRef> attrs;
      collect_columns(e, attrs);
      for (const auto& a : attrs) member.add_attr(a);
      std::vector<SelectItem> select = select_of(id_refs);
      select.push_back({rename(e), set.output_schema[i].name});
      branch.outputs.push_back(member.query(std::move(select)));
    }
    branch.guards.assign(src.output_arity(), std::nullopt);
    set.branches.push_back(std::move(branch));
    return set;
  }

  std::vector<ColumnRef> group_by;
  for (const auto& g : src.group_by) add_unique(group_by, g);
  std::vector<ColumnRef> open;
  for (const auto& g : group_by) {
    if (!contains(base.present, g)) open.push_back(g);
  }

  for (std::size_t i = 0; i < src.select_exprs.size(); ++i) {
    std::vector<ColumnRef> attrs;
    collect_columns(src.select_exprs[i].expr, attrs);
    if (attrs.empty()) set.constants[i] = eval_expression(src.select_exprs[i].expr, {});
  }

  const std::size_t patterns = std::size_t{1} << open.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    Core core = base;
    ExpansionBranch branch;
    std::vector<std::string> notes;
    for (std::size_t k = 0; k < open.size(); ++k) {
      const ColumnRef& g = open[k];
      bool present = (mask >> k) & 1U;
      if (present) {
        core.add_attr(g);
      } else {
        core.filters.push_back(presence_test(g, names, false));
      }
      notes.push_back(g.table + "." + g.attribute + (present ? " present" : " missing"));
    }
    branch.description = notes.empty() ? "all rows" : "";
    for (std::size_t k = 0; k < notes.size(); ++k) branch.description += (k ? ", " : "") + notes[k];
    for (const auto& g : group_by) {
      if (contains(core.present, g)) branch.present_group_by.push_back(g);
    }
    const std::vector<ColumnRef> keys = rename(branch.present_group_by);

    std::vector<ColumnRef> key_select = id_refs;
    key_select.insert(key_select.end(), keys.begin(), keys.end());
    branch.key = core.query(select_of(key_select));

    for (std::size_t i = 0; i < src.select_exprs.size(); ++i) {
      const Expression& e = src.select_exprs[i].expr;
      std::vector<ColumnRef> attrs;
      collect_columns(e, attrs);
      bool available = !attrs.empty() && std::all_of(attrs.begin(), attrs.end(), [&](const ColumnRef& a) {
        return contains(core.present, a);
      });
      if (!available) {
        branch.outputs.push_back(std::nullopt);
        continue;
      }
      std::vector<SelectItem> select = select_of(keys);
      select.push_back({rename(e), set.output_schema[i].name});
      Query member = core.query(std::move(select));
      member.group_by = keys;
      branch.outputs.push_back(std::move(member));
    }
    branch.guards.assign(src.select_exprs.size(), std::nullopt);

    for (std::size_t j = 0; j < src.select_aggs.size(); ++j) {
      const AggregateExpression& agg = src.select_aggs[j].agg;
      std::vector<ColumnRef> attrs;
      collect_columns(agg, attrs);
      std::vector<ColumnRef> extra;
      for (const auto& a : attrs) {
        if (!contains(core.present, a)) extra.push_back(a);
      }
      Core member = core;
      for (const auto& a : extra) member.add_attr(a);
      Query q_member = member.query(select_of(keys));
      q_member.select_aggs.push_back(
          {rename(agg), set.output_schema[src.select_exprs.size() + j].name});
      q_member.group_by = keys;
      branch.outputs.push_back(std::move(q_member));

      if (agg.star || extra.empty()) {
        branch.guards.push_back(std::nullopt);
        continue;
      }
      std::vector<Formula> missing;
      for (const auto& a : extra) missing.push_back(presence_test(a, names, false));
      std::vector<Formula> guard_where;
      guard_where.push_back(disjoin(std::move(missing)));
      branch.guards.push_back(core.query(select_of(key_select), std::move(guard_where)));
    }
    set.branches.push_back(std::move(branch));
  }
  return set;
}

Catalog base_catalog(const NormalizedDatabase& ndb) {
  Catalog c;
  for (const auto& [name, g] : ndb) c.add(name, g.attributes);
  return c;
}

NormalizedGroup run_cs(const Query& q, const NormalizedDatabase& ndb) {
  return run_cs(expand(q, base_catalog(ndb)), materialize(ndb));
}

namespace {

std::vector<Row> run_member(const Query& q, const Database& db) {
  return run_query(q, db, EvalMode::NullFree).rows();
}

}  // namespace

NormalizedGroup run_cs(const ExpandedQuerySet& set, const Database& db) {
  NormalizedGroup out;
  out.base_name = "result";
  out.attributes = set.output_schema;
  out.entries.assign(set.output_schema.size(), {});
  const std::size_t k = set.table_count;
  const std::size_t arity = set.output_schema.size();

  auto prefix = [](const Row& row, std::size_t n) { return Row(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(n)); };
  auto suffix = [](const Row& row, std::size_t from) { return Row(row.begin() + static_cast<std::ptrdiff_t>(from), row.end()); };

  if (!set.aggregate) {
    const ExpansionBranch& branch = set.branches.at(0);
    std::map<Row, OpaqueId> key_ids;
    for (const Row& row : run_member(branch.key, db)) {
      OpaqueId id = out.keys.size() + 1;
      key_ids.emplace(row, id);
      out.keys.push_back(id);
    }
    for (std::size_t i = 0; i < arity; ++i) {
      if (!branch.outputs[i]) continue;
      for (const Row& row : run_member(*branch.outputs[i], db)) {
        auto it = key_ids.find(prefix(row, k));
        if (it == key_ids.end()) {
          throw Error(ErrorKind::DanglingId, "output member " + set.output_schema[i].name +
                                                 " produced a row outside the key query");
        }
        out.entries[i].emplace_back(it->second, row.back());
      }
    }
  } else {
    const bool single_group = set.source.group_by.empty();
    for (std::size_t b = 0; b < set.branches.size(); ++b) {
      const ExpansionBranch& branch = set.branches[b];
      const std::size_t g = branch.present_group_by.size();
      std::map<Row, OpaqueId> group_ids;
      std::vector<OpaqueId> created;
      auto create = [&](const Row& key) {
        auto [it, inserted] = group_ids.emplace(key, 0);
        if (inserted) {
          it->second = out.keys.size() + 1;
          out.keys.push_back(it->second);
          created.push_back(it->second);
        }
      };
      if (single_group) create(Row{});
      for (const Row& row : run_member(branch.key, db)) create(suffix(row, k));

      std::set<std::pair<OpaqueId, std::size_t>> guarded;
      for (std::size_t i = 0; i < arity; ++i) {
        if (!branch.guards[i]) continue;
        for (const Row& row : run_member(*branch.guards[i], db)) {
          auto it = group_ids.find(suffix(row, k));
          if (it != group_ids.end()) guarded.emplace(it->second, i);
        }
      }
      for (std::size_t i = 0; i < arity; ++i) {
        if (set.constants[i]) {
          for (OpaqueId id : created) out.entries[i].emplace_back(id, *set.constants[i]);
          continue;
        }
        if (!branch.outputs[i]) continue;
        std::set<OpaqueId> filled;
        for (const Row& row : run_member(*branch.outputs[i], db)) {
          auto it = group_ids.find(prefix(row, g));
          if (it == group_ids.end() || guarded.count({it->second, i})) continue;
          // Rows of one group agree on a GROUP BY expression; keep one.
          if (filled.insert(it->second).second) out.entries[i].emplace_back(it->second, row.back());
        }
      }
    }
  }
  for (auto& e : out.entries) std::sort(e.begin(), e.end());
  out.validate();
  return out;
}

Query compile_to_3vl(const Query& q, const Catalog& catalog) {
  bind(q, catalog);
  Query out = q;
  if (out.where) out.where = missing_to_isnull(*out.where);
  return out;
}

std::string format_expansion(const ExpandedQuerySet& set) {
  std::ostringstream os;
  auto emit = [&](const std::string& header, const Query& q) {
    os << "-- " << header << '\n' << print(q) << "\n;\n";
  };
  for (std::size_t b = 0; b < set.branches.size(); ++b) {
    const ExpansionBranch& branch = set.branches[b];
    if (set.branches.size() > 1) os << "-- branch " << b + 1 << ": " << branch.description << '\n';
    emit("key", branch.key);
    for (std::size_t i = 0; i < branch.outputs.size(); ++i) {
      const std::string& name = set.output_schema[i].name;
      if (set.constants[i]) {
        os << "-- output " << name << " constant " << set.constants[i]->debug_string() << '\n';
      } else if (branch.outputs[i]) {
        emit("output " + name, *branch.outputs[i]);
      } else {
        os << "-- output " << name << " missing\n";
      }
      if (branch.guards[i]) emit("guard " + name, *branch.guards[i]);
    }
  }
  return os.str();
}

}  // namespace colsem

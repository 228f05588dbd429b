#include <sstream>

#include "colsem/sql.hpp"

namespace colsem {
namespace {

int precedence(const Expression& e) {
  if (e.kind != Expression::Kind::Function) return 4;
  switch (e.op) {
    case FunctionOp::Concat: return 1;
    case FunctionOp::Add:
    case FunctionOp::Sub: return 2;
    case FunctionOp::Mul:
    case FunctionOp::Div: return 3;
  }
  return 4;
}

std::string quote(std::string_view s, char q) {
  std::string out(1, q);
  for (char c : s) {
    if (c == q) out += q;
    out += c;
  }
  out += q;
  return out;
}

std::string constant_text(const Value& v, const PrintOptions& options) {
  if (v.is_str()) return quote(v.as_str(), options.string_quote);
  return v.debug_string();
}

std::string ref_text(const ColumnRef& r) {
  return r.table.empty() ? r.attribute : r.table + "." + r.attribute;
}

void print_expr(std::ostream& os, const Expression& e, const PrintOptions& options) {
  switch (e.kind) {
    case Expression::Kind::Constant:
      os << constant_text(e.constant, options);
      return;
    case Expression::Kind::Column:
      os << ref_text(e.column);
      return;
    case Expression::Kind::Function: {
      int p = precedence(e);
      const Expression& l = e.args.at(0);
      const Expression& r = e.args.at(1);
      bool paren_l = precedence(l) < p;
      bool paren_r = precedence(r) <= p;
      if (paren_l) os << '(';
      print_expr(os, l, options);
      if (paren_l) os << ')';
      os << ' ' << symbol(e.op) << ' ';
      if (paren_r) os << '(';
      print_expr(os, r, options);
      if (paren_r) os << ')';
      return;
    }
  }
}

void print_query(std::ostream& os, const Query& q, const PrintOptions& options);

int precedence(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Or: return 1;
    case Formula::Kind::And: return 2;
    case Formula::Kind::Not: return 3;
    default: return 4;
  }
}

void print_formula(std::ostream& os, const Formula& f, const PrintOptions& options) {
  switch (f.kind) {
    case Formula::Kind::Predicate:
      print_expr(os, f.operands[0], options);
      os << ' ' << symbol(f.op) << ' ';
      print_expr(os, f.operands[1], options);
      return;
    case Formula::Kind::IsNull:
      print_expr(os, f.operands[0], options);
      os << " IS NULL";
      return;
    case Formula::Kind::Missing:
      os << f.missing.table << " MISSING " << f.missing.attribute;
      return;
    case Formula::Kind::Membership: {
      bool tuple = f.operands.size() != 1;
      if (tuple) os << '(';
      for (std::size_t i = 0; i < f.operands.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, f.operands[i], options);
      }
      if (tuple) os << ')';
      os << (f.negated ? " NOT IN (" : " IN (");
      print_query(os, *f.subquery, options);
      os << ')';
      return;
    }
    case Formula::Kind::Not: {
      const Formula& c = f.children[0];
      if (c.kind == Formula::Kind::IsNull) {
        print_expr(os, c.operands[0], options);
        os << " IS NOT NULL";
        return;
      }
      os << "NOT (";
      print_formula(os, c, options);
      os << ')';
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      int p = precedence(f);
      bool paren_l = precedence(f.lhs()) < p;
      bool paren_r = precedence(f.rhs()) <= p;
      if (paren_l) os << '(';
      print_formula(os, f.lhs(), options);
      if (paren_l) os << ')';
      os << (f.kind == Formula::Kind::And ? " AND " : " OR ");
      if (paren_r) os << '(';
      print_formula(os, f.rhs(), options);
      if (paren_r) os << ')';
      return;
    }
  }
}

void print_agg(std::ostream& os, const AggregateExpression& a, const PrintOptions& options) {
  os << to_string(a.func) << '(';
  if (a.star) {
    os << '*';
  } else {
    print_expr(os, *a.arg, options);
  }
  os << ')';
}

void print_query(std::ostream& os, const Query& q, const PrintOptions& options) {
  os << "SELECT ";
  if (q.star) {
    os << '*';
  } else {
    bool first = true;
    for (const auto& s : q.select_exprs) {
      if (!first) os << ", ";
      first = false;
      print_expr(os, s.expr, options);
      if (s.alias) os << " AS " << *s.alias;
    }
    for (const auto& a : q.select_aggs) {
      if (!first) os << ", ";
      first = false;
      print_agg(os, a.agg, options);
      if (a.alias) os << " AS " << *a.alias;
    }
  }
  if (!q.from.empty()) {
    os << " FROM ";
    for (std::size_t i = 0; i < q.from.size(); ++i) {
      if (i) os << ", ";
      os << q.from[i].name;
      if (q.from[i].alias) os << " AS " << *q.from[i].alias;
    }
  }
  if (q.where) {
    os << " WHERE ";
    print_formula(os, *q.where, options);
  }
  if (!q.group_by.empty()) {
    os << " GROUP BY ";
    for (std::size_t i = 0; i < q.group_by.size(); ++i) {
      if (i) os << ", ";
      os << ref_text(q.group_by[i]);
    }
  }
}

// ---- s-expression dump ----

class Dumper {
 public:
  std::string str() const { return out_.str(); }

  void open(int depth, const std::string& head) {
    out_ << std::string(2 * depth, ' ') << '(' << head << '\n';
  }
  void leaf(int depth, const std::string& text) {
    out_ << std::string(2 * depth, ' ') << '(' << text << ")\n";
  }
  void close(int depth) { out_ << std::string(2 * depth, ' ') << ")\n"; }

  void expr(const Expression& e, int d) {
    switch (e.kind) {
      case Expression::Kind::Constant: leaf(d, "const " + e.constant.debug_string()); return;
      case Expression::Kind::Column: leaf(d, "column " + ref_text(e.column)); return;
      case Expression::Kind::Function:
        open(d, "apply " + std::string(symbol(e.op)));
        for (const auto& a : e.args) expr(a, d + 1);
        close(d);
        return;
    }
  }

  void formula(const Formula& f, int d) {
    switch (f.kind) {
      case Formula::Kind::Predicate:
        open(d, "predicate " + std::string(symbol(f.op)));
        for (const auto& e : f.operands) expr(e, d + 1);
        close(d);
        return;
      case Formula::Kind::IsNull:
        open(d, "is-null");
        expr(f.operands[0], d + 1);
        close(d);
        return;
      case Formula::Kind::Missing:
        leaf(d, "missing " + f.missing.table + " " + f.missing.attribute);
        return;
      case Formula::Kind::Membership:
        open(d, f.negated ? "not-in" : "in");
        for (const auto& e : f.operands) expr(e, d + 1);
        query(*f.subquery, d + 1);
        close(d);
        return;
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Not:
        open(d, f.kind == Formula::Kind::And ? "and" : f.kind == Formula::Kind::Or ? "or" : "not");
        for (const auto& c : f.children) formula(c, d + 1);
        close(d);
        return;
    }
  }

  void query(const Query& q, int d) {
    open(d, "query");
    open(d + 1, "select");
    if (q.star) leaf(d + 2, "star");
    for (const auto& s : q.select_exprs) {
      if (s.alias) {
        open(d + 2, "as " + *s.alias);
        expr(s.expr, d + 3);
        close(d + 2);
      } else {
        expr(s.expr, d + 2);
      }
    }
    for (const auto& a : q.select_aggs) {
      int base = d + 2;
      if (a.alias) open(base++, "as " + *a.alias);
      std::string head = "aggregate " + std::string(to_string(a.agg.func));
      if (a.agg.star) {
        leaf(base, head + " *");
      } else {
        open(base, head);
        expr(*a.agg.arg, base + 1);
        close(base);
      }
      if (a.alias) close(d + 2);
    }
    close(d + 1);
    if (!q.from.empty()) {
      open(d + 1, "from");
      for (const auto& t : q.from) leaf(d + 2, "table " + t.name + (t.alias ? " " + *t.alias : ""));
      close(d + 1);
    }
    if (q.where) {
      open(d + 1, "where");
      formula(*q.where, d + 2);
      close(d + 1);
    }
    if (!q.group_by.empty()) {
      open(d + 1, "group-by");
      for (const auto& g : q.group_by) leaf(d + 2, "column " + ref_text(g));
      close(d + 1);
    }
    close(d);
  }

 private:
  std::ostringstream out_;
};

}  // namespace

std::string print(const Query& q, const PrintOptions& options) {
  std::ostringstream os;
  print_query(os, q, options);
  return os.str();
}

std::string print(const Expression& e, const PrintOptions& options) {
  std::ostringstream os;
  print_expr(os, e, options);
  return os.str();
}

std::string print(const Formula& f, const PrintOptions& options) {
  std::ostringstream os;
  print_formula(os, f, options);
  return os.str();
}

std::string print(const AggregateExpression& a, const PrintOptions& options) {
  std::ostringstream os;
  print_agg(os, a, options);
  return os.str();
}

std::string dump_ast(const Query& q) {
  Dumper d;
  d.query(q, 0);
  return d.str();
}

}  // namespace colsem

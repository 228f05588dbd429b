#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "colsem/error.hpp"
#include "colsem/sql.hpp"

namespace colsem {
namespace {

enum class Tok { Ident, Keyword, Int, Float, String, Symbol, End };

struct Token {
  Tok type = Tok::End;
  std::string text;  // keywords upper-cased; strings unescaped
  std::size_t line = 1;
  std::size_t column = 1;
};

const std::set<std::string, std::less<>> kKeywords = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY",   "AS",      "AND", "OR",
    "NOT",    "IS",   "NULL",  "MISSING", "IN", "TRUE",    "FALSE"};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      std::string up = upper(word);
      if (kKeywords.count(up)) {
        t.type = Tok::Keyword;
        t.text = up;
      } else {
        t.type = Tok::Ident;
        t.text = word;
      }
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      bool is_float = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        is_float = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          is_float = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      t.type = is_float ? Tok::Float : Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      std::string value;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == c) {
          if (j + 1 < src.size() && src[j + 1] == c) {
            value += c;
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        value += src[j++];
      }
      if (!closed) throw Error(ErrorKind::Syntax, "unterminated string literal", line, col);
      t.type = Tok::String;
      t.text = std::move(value);
      advance(j - i);
    } else {
      static const char* kTwo[] = {"<>", "<=", ">=", "!=", "||"};
      std::string sym;
      for (const char* two : kTwo) {
        if (src.substr(i, 2) == two) sym = two;
      }
      if (sym.empty()) {
        if (std::string_view("(),.*+-/=<>;").find(c) == std::string_view::npos) {
          throw Error(ErrorKind::Syntax, std::string("unexpected character '") + c + "'", line, col);
        }
        sym = std::string(1, c);
      }
      if (sym == "!=") sym = "<>";
      t.type = Tok::Symbol;
      t.text = sym;
      advance(sym == "<>" && src[i] == '!' ? 2 : sym.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.type = Tok::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

std::optional<AggregateFunc> aggregate_name(std::string_view word) {
  std::string up = upper(word);
  if (up == "COUNT") return AggregateFunc::Count;
  if (up == "SUM") return AggregateFunc::Sum;
  if (up == "MIN") return AggregateFunc::Min;
  if (up == "MAX") return AggregateFunc::Max;
  if (up == "AVG") return AggregateFunc::Avg;
  return std::nullopt;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, Dialect dialect)
      : tokens_(std::move(tokens)), dialect_(dialect) {}

  Query parse_statement() {
    Query q = parse_query();
    if (is_symbol(";")) advance();
    if (peek().type != Tok::End) fail("unexpected '" + peek().text + "' after statement");
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  void advance() {
    if (pos_ + 1 < tokens_.size()) ++pos_;
  }
  bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).type == Tok::Keyword && peek(ahead).text == kw;
  }
  bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
    return peek(ahead).type == Tok::Symbol && peek(ahead).text == s;
  }
  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorKind::Syntax, message, peek().line, peek().column);
  }
  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) fail("expected " + std::string(kw));
    advance();
  }
  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) fail("expected '" + std::string(s) + "'");
    advance();
  }
  std::string expect_ident(std::string_view what) {
    if (peek().type != Tok::Ident) fail("expected " + std::string(what));
    std::string name = peek().text;
    advance();
    return name;
  }

  Query parse_query() {
    Query q;
    expect_keyword("SELECT");
    if (is_symbol("*")) {
      q.star = true;
      advance();
    } else {
      parse_select_item(q);
      while (is_symbol(",")) {
        advance();
        parse_select_item(q);
      }
    }
    if (is_keyword("FROM")) {
      advance();
      q.from.push_back(parse_table_ref());
      while (is_symbol(",")) {
        advance();
        q.from.push_back(parse_table_ref());
      }
    }
    if (is_keyword("WHERE")) {
      advance();
      q.where = parse_formula();
    }
    if (is_keyword("GROUP")) {
      advance();
      expect_keyword("BY");
      q.group_by.push_back(parse_column_ref());
      while (is_symbol(",")) {
        advance();
        q.group_by.push_back(parse_column_ref());
      }
    }
    return q;
  }

  std::optional<std::string> parse_alias(bool require_as) {
    if (is_keyword("AS")) {
      advance();
      return expect_ident("alias after AS");
    }
    if (!require_as && peek().type == Tok::Ident) {
      std::string a = peek().text;
      advance();
      return a;
    }
    return std::nullopt;
  }

  void parse_select_item(Query& q) {
    if (peek().type == Tok::Ident && is_symbol("(", 1)) {
      if (auto func = aggregate_name(peek().text)) {
        advance();
        advance();
        AggregateItem item;
        if (is_symbol("*")) {
          if (*func != AggregateFunc::Count) fail("only COUNT accepts *");
          advance();
          item.agg = AggregateExpression::count_star();
        } else {
          item.agg = AggregateExpression::of(*func, parse_expression());
        }
        expect_symbol(")");
        item.alias = parse_alias(false);
        q.select_aggs.push_back(std::move(item));
        return;
      }
    }
    if (is_symbol("*")) fail("'*' must be the whole select list");
    SelectItem item;
    item.expr = parse_expression();
    item.alias = parse_alias(false);
    q.select_exprs.push_back(std::move(item));
  }

  TableRef parse_table_ref() {
    TableRef t;
    t.name = expect_ident("table name");
    t.alias = parse_alias(false);
    return t;
  }

  ColumnRef parse_column_ref() {
    std::string first = expect_ident("column reference");
    if (is_symbol(".")) {
      advance();
      return ColumnRef{first, expect_ident("attribute name")};
    }
    return ColumnRef{"", first};
  }

  // formula := conj (OR conj)*
  Formula parse_formula() {
    Formula f = parse_conjunction();
    while (is_keyword("OR")) {
      advance();
      f = Formula::disj(std::move(f), parse_conjunction());
    }
    return f;
  }

  Formula parse_conjunction() {
    Formula f = parse_negation();
    while (is_keyword("AND")) {
      advance();
      f = Formula::conj(std::move(f), parse_negation());
    }
    return f;
  }

  Formula parse_negation() {
    if (is_keyword("NOT")) {
      advance();
      return Formula::negation(parse_negation());
    }
    return parse_atom();
  }

  bool starts_expression_suffix() const {
    if (peek().type == Tok::Symbol) {
      static const std::set<std::string, std::less<>> kOps = {
          "=", "<>", "<", "<=", ">", ">=", "+", "-", "*", "/", "||"};
      return kOps.count(peek().text) > 0;
    }
    return is_keyword("IS") || is_keyword("IN") || (is_keyword("NOT") && is_keyword("IN", 1));
  }

  Formula parse_atom() {
    if (peek().type == Tok::Ident && is_keyword("MISSING", 1)) {
      std::string table = peek().text;
      advance();
      advance();
      std::string attr = expect_ident("attribute after MISSING");
      if (dialect_ != Dialect::Columnar) {
        throw Error(ErrorKind::Dialect, "MISSING is only available in the columnar dialect");
      }
      return Formula::missing_of(std::move(table), std::move(attr));
    }
    if (is_symbol("(")) {
      std::size_t saved = pos_;
      try {
        advance();
        Formula inner = parse_formula();
        expect_symbol(")");
        if (!starts_expression_suffix()) return inner;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Dialect) throw;
      }
      pos_ = saved;
      if (auto tuple = try_tuple_membership()) return std::move(*tuple);
      pos_ = saved;
    }
    Expression lhs = parse_expression();
    if (is_keyword("IS")) {
      advance();
      bool negated = false;
      if (is_keyword("NOT")) {
        negated = true;
        advance();
      }
      expect_keyword("NULL");
      if (dialect_ != Dialect::ThreeValued) {
        throw Error(ErrorKind::Dialect, "IS NULL is not available in the columnar dialect");
      }
      Formula f = Formula::is_null(std::move(lhs));
      return negated ? Formula::negation(std::move(f)) : f;
    }
    if (is_keyword("IN") || (is_keyword("NOT") && is_keyword("IN", 1))) {
      std::vector<Expression> tuple;
      tuple.push_back(std::move(lhs));
      return parse_membership_tail(std::move(tuple));
    }
    if (peek().type != Tok::Symbol) fail("expected comparison operator");
    static const std::pair<std::string_view, CompareOp> kOps[] = {
        {"=", CompareOp::Eq}, {"<>", CompareOp::Ne}, {"<", CompareOp::Lt},
        {"<=", CompareOp::Le}, {">", CompareOp::Gt}, {">=", CompareOp::Ge}};
    for (const auto& [text, op] : kOps) {
      if (peek().text == text) {
        advance();
        return Formula::predicate(op, std::move(lhs), parse_expression());
      }
    }
    fail("expected comparison operator");
  }

  std::optional<Formula> try_tuple_membership() {
    try {
      expect_symbol("(");
      std::vector<Expression> tuple;
      tuple.push_back(parse_expression());
      if (!is_symbol(",")) return std::nullopt;
      while (is_symbol(",")) {
        advance();
        tuple.push_back(parse_expression());
      }
      expect_symbol(")");
      if (!(is_keyword("IN") || (is_keyword("NOT") && is_keyword("IN", 1)))) return std::nullopt;
      return parse_membership_tail(std::move(tuple));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Dialect) throw;
      return std::nullopt;
    }
  }

  Formula parse_membership_tail(std::vector<Expression> tuple) {
    bool negated = false;
    if (is_keyword("NOT")) {
      negated = true;
      advance();
    }
    expect_keyword("IN");
    expect_symbol("(");
    Query sub = parse_query();
    expect_symbol(")");
    return Formula::membership(std::move(tuple), std::move(sub), negated);
  }

  // expression := additive ('||' additive)*
  Expression parse_expression() {
    Expression e = parse_additive();
    while (is_symbol("||")) {
      advance();
      e = Expression::apply(FunctionOp::Concat, std::move(e), parse_additive());
    }
    return e;
  }

  Expression parse_additive() {
    Expression e = parse_multiplicative();
    while (is_symbol("+") || is_symbol("-")) {
      FunctionOp op = is_symbol("+") ? FunctionOp::Add : FunctionOp::Sub;
      advance();
      e = Expression::apply(op, std::move(e), parse_multiplicative());
    }
    return e;
  }

  Expression parse_multiplicative() {
    Expression e = parse_primary();
    while (is_symbol("*") || is_symbol("/")) {
      FunctionOp op = is_symbol("*") ? FunctionOp::Mul : FunctionOp::Div;
      advance();
      e = Expression::apply(op, std::move(e), parse_primary());
    }
    return e;
  }

  Expression parse_number(bool negative) {
    const Token& t = peek();
    std::string text = (negative ? "-" : "") + t.text;
    if (t.type == Tok::Int) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size()) fail("integer literal out of range");
      advance();
      return Expression::constant_of(Value::integer(v));
    }
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) fail("invalid float literal");
    advance();
    return Expression::constant_of(Value::real(v));
  }

  Expression parse_primary() {
    const Token& t = peek();
    if (is_symbol("-") && (peek(1).type == Tok::Int || peek(1).type == Tok::Float)) {
      advance();
      return parse_number(true);
    }
    if (t.type == Tok::Int || t.type == Tok::Float) return parse_number(false);
    if (t.type == Tok::String) {
      std::string s = t.text;
      advance();
      return Expression::constant_of(Value::string(std::move(s)));
    }
    if (is_keyword("TRUE") || is_keyword("FALSE")) {
      bool b = is_keyword("TRUE");
      advance();
      return Expression::constant_of(Value::boolean(b));
    }
    if (is_keyword("NULL")) fail("NULL literals are not supported");
    if (is_symbol("(")) {
      advance();
      Expression e = parse_expression();
      expect_symbol(")");
      return e;
    }
    if (t.type == Tok::Ident) return Expression::column_of(parse_column_ref());
    fail("expected expression");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Dialect dialect_;
};

// Checks that qualified references name a FROM entry and that FROM bindings
// are unique. Subqueries are checked against their own FROM list.
void check_scopes(const Query& q);

void check_expression_scope(const Expression& e, const std::set<std::string>& scope) {
  if (e.kind == Expression::Kind::Column && !e.column.table.empty() &&
      !scope.count(e.column.table)) {
    throw Error(ErrorKind::UnresolvedColumn,
                "column " + e.column.table + "." + e.column.attribute +
                    " does not match any FROM entry");
  }
  for (const auto& a : e.args) check_expression_scope(a, scope);
}

void check_formula_scope(const Formula& f, const std::set<std::string>& scope) {
  if (f.kind == Formula::Kind::Missing && !scope.count(f.missing.table)) {
    throw Error(ErrorKind::UnresolvedColumn,
                "MISSING refers to " + f.missing.table + ", which is not a FROM entry");
  }
  for (const auto& e : f.operands) check_expression_scope(e, scope);
  for (const auto& c : f.children) check_formula_scope(c, scope);
  if (f.subquery) check_scopes(*f.subquery);
}

void check_scopes(const Query& q) {
  std::set<std::string> scope;
  for (const auto& t : q.from) {
    if (!scope.insert(t.binding()).second) {
      throw Error(ErrorKind::InvalidQuery, "duplicate FROM entry " + t.binding());
    }
  }
  for (const auto& s : q.select_exprs) check_expression_scope(s.expr, scope);
  for (const auto& a : q.select_aggs) {
    if (a.agg.arg) check_expression_scope(*a.agg.arg, scope);
  }
  if (q.where) check_formula_scope(*q.where, scope);
  for (const auto& g : q.group_by) {
    check_expression_scope(Expression::column_of(g), scope);
  }
}

}  // namespace

Query parse(std::string_view text, Dialect dialect) {
  Parser parser(lex(text), dialect);
  Query q = parser.parse_statement();
  check_scopes(q);
  return q;
}

Query parse_bound(std::string_view text, Dialect dialect, const Catalog& catalog) {
  return bind(parse(text, dialect), catalog);
}

}  // namespace colsem

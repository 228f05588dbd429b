#include "colsem/value.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "colsem/error.hpp"

namespace colsem {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::Dialect: return "DialectError";
    case ErrorKind::UnresolvedColumn: return "UnresolvedColumn";
    case ErrorKind::UnknownTable: return "UnknownTable";
    case ErrorKind::UnknownAttribute: return "UnknownAttribute";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::NullInNullFreeMode: return "NullInNullFreeMode";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::TypeParseError: return "TypeParseError";
    case ErrorKind::DanglingId: return "DanglingId";
    case ErrorKind::NameCollision: return "NameCollision";
    case ErrorKind::InvalidQuery: return "InvalidQuery";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Int: return "int";
    case ColumnType::Float: return "float";
    case ColumnType::Str: return "str";
    case ColumnType::Bool: return "bool";
  }
  return "?";
}

std::optional<ColumnType> parse_column_type(std::string_view text) {
  if (text == "int") return ColumnType::Int;
  if (text == "float") return ColumnType::Float;
  if (text == "str") return ColumnType::Str;
  if (text == "bool") return ColumnType::Bool;
  return std::nullopt;
}

ColumnType Value::type() const {
  if (is_int()) return ColumnType::Int;
  if (is_float()) return ColumnType::Float;
  if (is_str()) return ColumnType::Str;
  if (is_bool()) return ColumnType::Bool;
  throw Error(ErrorKind::TypeMismatch, "NULL has no type");
}

std::strong_ordering Value::operator<=>(const Value& other) const {
  if (data_.index() != other.data_.index()) return data_.index() <=> other.data_.index();
  if (is_float()) {
    // NaN never reaches here through the evaluators; order it last for safety.
    double a = as_float(), b = other.as_float();
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) <=> std::isnan(b);
    if (a < b) return std::strong_ordering::less;
    if (a > b) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  if (is_int()) return as_int() <=> other.as_int();
  if (is_bool()) return as_bool() <=> other.as_bool();
  if (is_str()) return as_str().compare(other.as_str()) <=> 0;
  return std::strong_ordering::equal;
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string out(buf.data(), end);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string Value::debug_string() const {
  if (is_null()) return "NULL";
  if (is_int()) return std::to_string(as_int());
  if (is_float()) return format_float(as_float());
  if (is_bool()) return as_bool() ? "TRUE" : "FALSE";
  return "\"" + as_str() + "\"";
}

std::string_view to_string(TruthValue t) {
  switch (t) {
    case TruthValue::True: return "TRUE";
    case TruthValue::False: return "FALSE";
    case TruthValue::Unknown: return "UNKNOWN";
  }
  return "?";
}

TruthValue kleene_and(TruthValue a, TruthValue b) {
  if (a == TruthValue::False || b == TruthValue::False) return TruthValue::False;
  if (a == TruthValue::Unknown || b == TruthValue::Unknown) return TruthValue::Unknown;
  return TruthValue::True;
}

TruthValue kleene_or(TruthValue a, TruthValue b) {
  if (a == TruthValue::True || b == TruthValue::True) return TruthValue::True;
  if (a == TruthValue::Unknown || b == TruthValue::Unknown) return TruthValue::Unknown;
  return TruthValue::False;
}

TruthValue kleene_not(TruthValue a) {
  switch (a) {
    case TruthValue::True: return TruthValue::False;
    case TruthValue::False: return TruthValue::True;
    case TruthValue::Unknown: return TruthValue::Unknown;
  }
  return TruthValue::Unknown;
}

}  // namespace colsem

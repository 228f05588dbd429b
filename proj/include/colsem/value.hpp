#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace colsem {

enum class ColumnType { Int, Float, Str, Bool };

std::string_view to_string(ColumnType type);
std::optional<ColumnType> parse_column_type(std::string_view text);

/// A cell value: Null or a scalar of one of the four column types.
/// Null is a marker outside every domain; it carries no type.
class Value {
 public:
  Value() = default;
  static Value null() { return Value(); }
  static Value integer(std::int64_t v) { return Value(Data(v)); }
  static Value real(double v) { return Value(Data(v)); }
  static Value string(std::string v) { return Value(Data(std::move(v))); }
  static Value boolean(bool v) { return Value(Data(v)); }

  bool is_null() const { return std::holds_alternative<std::monostate>(data_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
  bool is_float() const { return std::holds_alternative<double>(data_); }
  bool is_str() const { return std::holds_alternative<std::string>(data_); }
  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_numeric() const { return is_int() || is_float(); }

  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_float() const { return std::get<double>(data_); }
  const std::string& as_str() const { return std::get<std::string>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  /// Numeric value widened to double; requires is_numeric().
  double as_number() const { return is_int() ? static_cast<double>(as_int()) : as_float(); }

  /// Declared type of a non-null value.
  ColumnType type() const;

  /// Structural equality: same alternative and same payload. Null == Null here;
  /// SQL comparison semantics live in the evaluators.
  bool operator==(const Value& other) const = default;
  /// Total order used for sorting multisets: Null < Bool < Int < Float < Str.
  std::strong_ordering operator<=>(const Value& other) const;

  /// Human/debug rendering: NULL, 42, 1.5, "text", TRUE.
  std::string debug_string() const;

 private:
  using Data = std::variant<std::monostate, bool, std::int64_t, double, std::string>;
  explicit Value(Data data) : data_(std::move(data)) {}
  Data data_;
};

/// Shortest decimal text that parses back to the same double; always contains
/// a '.', 'e', "inf" or "nan" so it cannot be mistaken for an integer.
std::string format_float(double v);

enum class TruthValue { False, True, Unknown };

std::string_view to_string(TruthValue t);

TruthValue kleene_and(TruthValue a, TruthValue b);
TruthValue kleene_or(TruthValue a, TruthValue b);
TruthValue kleene_not(TruthValue a);

inline TruthValue truth(bool b) { return b ? TruthValue::True : TruthValue::False; }

}  // namespace colsem

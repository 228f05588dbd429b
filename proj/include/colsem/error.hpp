#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace colsem {

enum class ErrorKind {
  Syntax,
  Dialect,
  UnresolvedColumn,
  UnknownTable,
  UnknownAttribute,
  TypeMismatch,
  DivisionByZero,
  NullInNullFreeMode,
  ArityMismatch,
  TypeParseError,
  DanglingId,
  NameCollision,
  InvalidQuery,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// All library failures are reported through this exception. `kind()` is the
/// stable discriminator; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  /// Syntax errors carry a 1-based source position.
  Error(ErrorKind kind, const std::string& message, std::size_t line, std::size_t column)
      : std::runtime_error(message + " at line " + std::to_string(line) + ", column " +
                           std::to_string(column)),
        kind_(kind),
        line_(line),
        column_(column) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  ErrorKind kind_;
  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

}  // namespace colsem

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gliderkit {

// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. line/column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(decorate(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string decorate(const std::string& what, std::size_t line,
                              std::size_t column) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line);
    if (column > 0) out += (out.empty() ? "" : ", ") + std::string("column ") + std::to_string(column);
    return out.empty() ? what : out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

// Value outside the domain an operation accepts.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Inputs are individually well-formed but inconsistent with each other.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Geometry or statistics collapse (polar projection, too few points, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Bad parameter value or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A required input file is missing or unreadable.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace gliderkit

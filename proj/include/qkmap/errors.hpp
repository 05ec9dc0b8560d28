#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qkmap {

/// Malformed netlist or profile text. Carries a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Inputs that parse fine but cannot be mapped (budgets, core counts, missing
/// profile rows).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A broken internal invariant (cyclic QODG, scheduler overrun).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qkmap

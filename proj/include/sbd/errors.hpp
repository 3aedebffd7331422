#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbd {

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Index or range outside the valid domain.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Caller violated a documented precondition (dimension mismatch, bad options, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sbd

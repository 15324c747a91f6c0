#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace factorial {

// Bad caller input: out-of-range parameters, mismatched dimensions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A request that is well-formed but too large to materialize.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested representation does not exist for this design size.
class UnsupportedRepresentation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Division by a degenerate marginal probability (0 or 1).
class DegenerateProbability : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input file. `line` is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace factorial

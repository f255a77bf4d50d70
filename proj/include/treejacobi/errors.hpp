#pragma once

#include <stdexcept>
#include <string>

namespace treejacobi {

// Malformed graph-file syntax. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Input violates a structural invariant (disconnected, leaf, self-loop, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative method failed to converge or a limit sequence was inconsistent.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace treejacobi

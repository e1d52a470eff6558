#pragma once

#include <stdexcept>
#include <string>

namespace thermodiag {

/// Invalid building description, series or configuration.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular systems, non-finite states and other solver failures.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number (0 when unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, int line, const std::string& what)
      : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace thermodiag

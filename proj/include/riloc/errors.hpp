#pragma once

#include <stdexcept>
#include <string>

namespace riloc {

/// Invalid user input: malformed config files, out-of-range settings,
/// inconsistent CLI arguments. Maps to process exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime: singular information matrices, degenerate
/// geometry, non-convergent solves. Maps to process exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace riloc

#pragma once

#include <stdexcept>
#include <string>

namespace enkf {

/// Raised for invalid configuration files or flags (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a run produces NaN/Inf or blows up (CLI exit code 3).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace enkf

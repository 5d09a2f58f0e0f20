#pragma once

#include <stdexcept>
#include <string>

namespace m3fg {

/// Bad user input: unknown keys, out-of-range parameters, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: invalid kernel rows, value iteration that does not converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace m3fg

#pragma once

#include <stdexcept>
#include <string>

namespace ptq {

/// Invalid user input: malformed config, unparseable grid or state spec.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge or produced a state that violates
/// its physical invariants.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ptq

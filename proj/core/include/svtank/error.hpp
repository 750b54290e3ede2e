#pragma once

#include <stdexcept>
#include <string>

namespace svtank {

/// Raised when an input violates a documented invariant (bad parameters,
/// malformed state, length mismatch).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration text.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Raised by the time integrator when the liquid level drops to the
/// positivity floor or the state stops being finite.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}
}  // namespace detail

}  // namespace svtank

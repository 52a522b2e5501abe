#pragma once

#include <stdexcept>
#include <string>

namespace msalab {

/// Input rejected because it violates a model or geometry constraint.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation refused to proceed because the numerics are unreliable
/// (near-singular shift, bracket without sign change, size limit).
class NumericalRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace msalab

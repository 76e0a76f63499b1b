#pragma once

#include <stdexcept>
#include <string>

namespace stage::num {

// Zero-norm vectors, empty groups and similar inputs that make the
// requested quantity undefined rather than malformed.
struct DegenerateInputError : std::runtime_error {
  explicit DegenerateInputError(const std::string& what)
      : std::runtime_error(what) {}
};

// NaN or infinity reached a numeric kernel. Distinct from invalid_argument
// so training loops can treat it as divergence, not a caller bug.
struct NonFiniteError : std::runtime_error {
  explicit NonFiniteError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace stage::num

#pragma once

#include <stdexcept>

namespace memcap {

/// A computation that could not produce a trustworthy number
/// (divergent state, singular covariance, solver non-convergence).
///
/// Invalid arguments and violated preconditions throw std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace memcap

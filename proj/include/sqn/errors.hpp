#pragma once

#include <stdexcept>
#include <string>

namespace sqn {

/// Raised when a direct solve meets a pivot below the singularity threshold.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a BFGS update is attempted on a pair with s'y at or below the
/// well-definedness threshold. Callers are expected to filter pairs first.
struct CurvatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when backtracking exhausts its trial budget.
struct LineSearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a search direction is not a descent direction (g'p >= 0).
struct NonDescentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an objective evaluation produces a non-finite value.
struct NumericOverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by the rho ratio when the model decrease is too small to divide by.
struct DegenerateModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension mismatches, asymmetric input to a symmetric routine, size guards.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Bad run configuration (unknown method id, non-positive budget, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dataset parse / validation failures. Carries the offending line when known.
struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sqn

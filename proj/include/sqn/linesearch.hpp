#pragma once

#include "sqn/objective.hpp"

namespace sqn {

struct LineSearchParams {
  double alpha0 = 1.0;
  double c1 = 1e-4;
  double tau = 0.5;
  int max_backtracks = 50;

  void validate() const;
};

struct LineSearchResult {
  double alpha = 0.0;
  double f_new = 0.0;
  int trials = 0;  // equals the epochs charged by the search
};

enum class StepMode { armijo, constant };

/// Step-length policy for the GD/BFGS-family runners.
struct StepRule {
  StepMode mode = StepMode::armijo;
  double alpha = 0.1;  // constant mode only
  LineSearchParams ls;
};

/// Backtracking Armijo search: returns the first alpha in {alpha0 * tau^i}
/// with F(w + alpha p) <= f0 + c1 * alpha * g'p. Each trial charges one
/// epoch through obj. Throws NonDescentError when g'p >= 0 and
/// LineSearchError when max_backtracks is exhausted.
LineSearchResult armijo_backtrack(CountingObjective& obj, const Vector& w,
                                  const Vector& p, const Vector& g, double f0,
                                  const LineSearchParams& params = {});

}  // namespace sqn

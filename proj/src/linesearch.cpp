#include "sqn/linesearch.hpp"

#include <cmath>

#include "sqn/errors.hpp"

namespace sqn {

void LineSearchParams::validate() const {
  if (!(alpha0 > 0.0) || !(c1 > 0.0 && c1 < 1.0) || !(tau > 0.0 && tau < 1.0) ||
      max_backtracks < 1) {
    throw ConfigError("invalid line search parameters");
  }
}

LineSearchResult armijo_backtrack(CountingObjective& obj, const Vector& w,
                                  const Vector& p, const Vector& g, double f0,
                                  const LineSearchParams& params) {
  params.validate();
  const double slope = dot(g, p);
  if (!(slope < 0.0)) {
    throw NonDescentError("search direction is not a descent direction");
  }

  double alpha = params.alpha0;
  LineSearchResult res;
  for (int trial = 0; trial < params.max_backtracks; ++trial) {
    Vector w_trial = w;
    axpy(alpha, p, w_trial);
    const double f_trial = obj.value(w_trial);
    ++res.trials;
    if (std::isfinite(f_trial) &&
        f_trial <= f0 + params.c1 * alpha * slope) {
      res.alpha = alpha;
      res.f_new = f_trial;
      return res;
    }
    alpha *= params.tau;
  }
  throw LineSearchError("backtracking exhausted after " +
                        std::to_string(res.trials) + " trials");
}

}  // namespace sqn

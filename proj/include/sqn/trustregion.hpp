#pragma once

#include <functional>

#include "sqn/objective.hpp"
#include "sqn/trace.hpp"

namespace sqn {

/// Radius-management constants. Validity constraints:
/// 0 <= eta3 < eta2 < 1, gamma1 in (0,1), zeta1 > 1, zeta2 in (0,1),
/// 0 < eta1, delta0 > 0, delta_max >= delta0.
struct TrustRegionParams {
  double eta1 = 1e-4;   // step acceptance threshold on rho
  double eta2 = 0.75;   // growth threshold
  double eta3 = 0.1;    // hold threshold
  double gamma1 = 0.5;  // "step well inside" fraction
  double zeta1 = 2.0;   // growth factor
  double zeta2 = 0.5;   // shrink factor
  double delta0 = 1.0;
  double delta_max = 1e6;
  /// CG residual tolerance relative to the gradient norm. Near-exact by
  /// default: model products cost no data access for compact quasi-Newton
  /// forms, and a loose forcing sequence would make the exact-model runs
  /// stop far from the Newton point.
  double cg_rel_tol = 1e-10;

  void validate() const;
};

enum class SubproblemStatus { interior, boundary, negative_curvature };

struct SubproblemResult {
  Vector p;
  double model_decrease = 0.0;  // m(0) - m(p), always >= 0
  SubproblemStatus status = SubproblemStatus::interior;
  int cg_iterations = 0;  // product-oracle invocations
  /// Model values m(z_j) along the inner iterates (m(0) first, final point
  /// last); kept for the monotonicity checks.
  std::vector<double> model_history;
};

using ProductOracle = std::function<Vector(const Vector&)>;

/// Steihaug-Toint truncated CG for min m(p) = g'p + 0.5 p'Bp s.t. |p|<=delta.
/// Starts from p = 0, exits at the boundary along the current direction on
/// negative curvature or radius violation, and terminates interior once the
/// residual drops to rel_tol * |g|. g = 0 yields p = 0 with zero decrease.
SubproblemResult steihaug_cg(const ProductOracle& bv, const Vector& g,
                             double delta, double rel_tol, int max_iter);

/// rho = (f_old - f_trial) / model_decrease. Throws DegenerateModelError
/// when model_decrease <= 1e-16.
double rho(double f_old, double f_trial, double model_decrease);

/// Radius update table:
///   rho > eta2 and |p| <= gamma1*delta  ->  delta
///   rho > eta2 and |p| >  gamma1*delta  ->  min(zeta1*delta, delta_max)
///   eta3 <= rho <= eta2                 ->  delta
///   otherwise                           ->  zeta2*delta
double adjust_tr(double delta, double rho_val, double p_norm,
                 const TrustRegionParams& params);

/// Newton trust-region baseline: the quasi-Newton model is replaced by exact
/// Hessian products, so every CG iteration touches the data (1 epoch each).
RunResult newton_tr_run(CountingObjective& obj, const Vector& w0,
                        const TrustRegionParams& params, const Budget& budget,
                        TraceRecorder& trace);

}  // namespace sqn

#include "sqn/trustregion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqn/errors.hpp"
#include "tr_loop.hpp"

namespace sqn {

void TrustRegionParams::validate() const {
  const bool ok = eta1 > 0.0 && 0.0 <= eta3 && eta3 < eta2 && eta2 < 1.0 &&
                  gamma1 > 0.0 && gamma1 < 1.0 && zeta1 > 1.0 && zeta2 > 0.0 &&
                  zeta2 < 1.0 && delta0 > 0.0 && delta_max >= delta0 &&
                  cg_rel_tol > 0.0;
  if (!ok) throw ConfigError("invalid trust-region parameters");
}

namespace {

/// Positive root of |z + tau*d| = delta.
double boundary_step(const Vector& z, const Vector& d, double delta) {
  const double dd = dot(d, d);
  const double zd = dot(z, d);
  const double zz = dot(z, z);
  const double disc = zd * zd + dd * (delta * delta - zz);
  return (-zd + std::sqrt(std::max(disc, 0.0))) / dd;
}

double model_value(const Vector& g, const Vector& p, const Vector& bp) {
  return dot(g, p) + 0.5 * dot(p, bp);
}

}  // namespace

SubproblemResult steihaug_cg(const ProductOracle& bv, const Vector& g,
                             double delta, double rel_tol, int max_iter) {
  if (!(delta > 0.0)) throw ConfigError("trust-region radius must be positive");
  const std::size_t n = g.size();
  SubproblemResult res;
  res.p.assign(n, 0.0);
  res.model_history.push_back(0.0);

  const double gnorm = norm2(g);
  if (gnorm == 0.0) return res;
  const double tol = rel_tol * gnorm;

  Vector z(n, 0.0);
  Vector bz(n, 0.0);
  Vector r = g;
  Vector d = scaled(g, -1.0);
  double rr = dot(r, r);

  for (int j = 0; j < max_iter; ++j) {
    const Vector bd = bv(d);
    ++res.cg_iterations;
    const double kappa = dot(d, bd);
    if (kappa <= 0.0) {
      const double tau = boundary_step(z, d, delta);
      axpy(tau, d, z);
      axpy(tau, bd, bz);
      res.p = z;
      res.status = SubproblemStatus::negative_curvature;
      res.model_history.push_back(model_value(g, res.p, bz));
      res.model_decrease = -res.model_history.back();
      return res;
    }
    const double alpha = rr / kappa;
    Vector z_next = z;
    axpy(alpha, d, z_next);
    if (norm2(z_next) >= delta) {
      const double tau = boundary_step(z, d, delta);
      axpy(tau, d, z);
      axpy(tau, bd, bz);
      res.p = z;
      res.status = SubproblemStatus::boundary;
      res.model_history.push_back(model_value(g, res.p, bz));
      res.model_decrease = -res.model_history.back();
      return res;
    }
    z = std::move(z_next);
    axpy(alpha, bd, bz);
    axpy(alpha, bd, r);
    res.model_history.push_back(model_value(g, z, bz));
    const double rr_next = dot(r, r);
    if (std::sqrt(rr_next) <= tol) break;
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < n; ++i) d[i] = -r[i] + beta * d[i];
    rr = rr_next;
  }

  res.p = z;
  res.status = SubproblemStatus::interior;
  res.model_decrease = -model_value(g, res.p, bz);
  return res;
}

double rho(double f_old, double f_trial, double model_decrease) {
  if (!(model_decrease > 1e-16)) {
    throw DegenerateModelError("model decrease too small for rho");
  }
  return (f_old - f_trial) / model_decrease;
}

double adjust_tr(double delta, double rho_val, double p_norm,
                 const TrustRegionParams& params) {
  if (rho_val > params.eta2) {
    if (p_norm <= params.gamma1 * delta) return delta;
    return std::min(params.zeta1 * delta, params.delta_max);
  }
  if (rho_val >= params.eta3) return delta;
  return params.zeta2 * delta;
}

namespace detail {

RunResult run_trust_region(CountingObjective& obj, Vector w0,
                           const TrustRegionParams& params,
                           const Budget& budget, TraceRecorder& trace,
                           const TrHooks& hooks) {
  params.validate();
  constexpr double kDeltaFloor = 1e-12;
  RunResult res;
  Vector w = std::move(w0);

  double f = 0.0;
  Vector g;
  try {
    f = obj.value(w);
    g = obj.gradient(w);
  } catch (const NumericOverflowError& e) {
    res.aborted = true;
    res.abort_reason = e.what();
    res.w_final = w;
    return res;
  }
  double gnorm = norm2(g);
  double delta = params.delta0;
  std::int64_t iter = 0;
  if (!trace.log(iter, obj.meter().epochs(), w, gnorm, delta, 0, 0)) {
    res.aborted = true;
    res.abort_reason = "non-finite trace row";
  }

  // finite termination needs d steps in exact arithmetic; rounding under
  // heavy conditioning wants some headroom
  const int max_cg = 2 * static_cast<int>(obj.dimension());
  while (!res.aborted && iter < budget.max_iters &&
         obj.meter().epochs() < budget.max_epochs &&
         gnorm > budget.grad_tol && delta >= kDeltaFloor) {
    TrIterStats stats;
    ProductOracle product = hooks.build_model(w, g, stats);
    if (!std::isfinite(stats.approx_norm_probe)) {
      res.aborted = true;
      res.abort_reason = "non-finite model norm probe";
      break;
    }
    res.max_approx_norm = std::max(res.max_approx_norm,
                                   stats.approx_norm_probe);

    const double delta_used = delta;
    SubproblemResult sub = steihaug_cg(product, g, delta, params.cg_rel_tol,
                                       std::max(1, max_cg));
    if (norm2(sub.p) > delta * (1.0 + 1e-12)) {
      res.aborted = true;
      res.abort_reason = "trust-region step infeasible";
      break;
    }
    double rho_val = -std::numeric_limits<double>::infinity();
    if (sub.model_decrease > 1e-16 && all_finite(sub.p)) {
      Vector w_trial = w;
      axpy(1.0, sub.p, w_trial);
      bool trial_ok = all_finite(w_trial);
      double f_trial = std::numeric_limits<double>::quiet_NaN();
      if (trial_ok) {
        try {
          f_trial = obj.value(w_trial);
        } catch (const NumericOverflowError&) {
          trial_ok = false;
        }
      }
      if (trial_ok && std::isfinite(f_trial)) {
        rho_val = rho(f, f_trial, sub.model_decrease);
        if (rho_val >= params.eta1) {
          Vector g_new;
          try {
            g_new = obj.gradient(w_trial);
          } catch (const NumericOverflowError& e) {
            res.aborted = true;
            res.abort_reason = e.what();
            break;
          }
          if (!all_finite(g_new)) {
            res.aborted = true;
            res.abort_reason = "non-finite gradient at accepted step";
            break;
          }
          if (hooks.on_accept) {
            hooks.on_accept(w, g, w_trial, g_new, stats);
          }
          w = std::move(w_trial);
          f = f_trial;
          g = std::move(g_new);
          gnorm = norm2(g);
        }
      }
    }
    delta = adjust_tr(delta, rho_val, norm2(sub.p), params);
    ++iter;
    if (hooks.on_iteration) hooks.on_iteration(w);
    if (!trace.log(iter, obj.meter().epochs(), w, gnorm, delta_used,
                   stats.pairs_accepted, stats.pairs_sampled)) {
      res.aborted = true;
      res.abort_reason = "non-finite trace row";
      break;
    }
  }

  res.rows = trace.rows();
  res.w_final = w;
  res.final_grad_norm = gnorm;
  return res;
}

}  // namespace detail

RunResult newton_tr_run(CountingObjective& obj, const Vector& w0,
                        const TrustRegionParams& params, const Budget& budget,
                        TraceRecorder& trace) {
  detail::TrHooks hooks;
  hooks.build_model = [&obj](const Vector& w, const Vector& /*g*/,
                             detail::TrIterStats&) -> ProductOracle {
    return [&obj, w](const Vector& v) { return obj.hvp(w, v); };
  };
  return detail::run_trust_region(obj, w0, params, budget, trace, hooks);
}

}  // namespace sqn

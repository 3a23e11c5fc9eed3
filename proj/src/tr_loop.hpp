#pragma once

// Internal trust-region iteration shared by the SR1-family runners and the
// exact-Hessian baseline. Not installed; include from src/ only.

#include <cstdint>

#include "sqn/objective.hpp"
#include "sqn/trace.hpp"
#include "sqn/trustregion.hpp"

namespace sqn::detail {

struct TrIterStats {
  std::int64_t pairs_sampled = 0;
  std::int64_t pairs_accepted = 0;
  double approx_norm_probe = 0.0;  // 0 when the model is not probed
};

struct TrHooks {
  /// Prepares the model at (w, g) and returns its product oracle. Any
  /// epoch-charged work (sampling, Hessian products) happens in here or
  /// inside the returned oracle.
  std::function<ProductOracle(const Vector& w, const Vector& g,
                              TrIterStats& stats)>
      build_model;
  /// Called after a step is accepted, before the trace row is written.
  std::function<void(const Vector& w_old, const Vector& g_old,
                     const Vector& w_new, const Vector& g_new,
                     TrIterStats& stats)>
      on_accept;
  /// Called at the end of every iteration with the current iterate
  /// (unchanged on rejected steps).
  std::function<void(const Vector& w)> on_iteration;
};

RunResult run_trust_region(CountingObjective& obj, Vector w0,
                           const TrustRegionParams& params,
                           const Budget& budget, TraceRecorder& trace,
                           const TrHooks& hooks);

}  // namespace sqn::detail

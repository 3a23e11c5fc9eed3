#pragma once

// Internal line-search iteration shared by the GD and BFGS-family runners.
// Not installed; include from src/ only.

#include <cstdint>
#include <functional>

#include "sqn/linesearch.hpp"
#include "sqn/objective.hpp"
#include "sqn/trace.hpp"

namespace sqn {
namespace detail {

struct LsIterStats {
  std::int64_t pairs_sampled = 0;
  std::int64_t pairs_accepted = 0;
};

struct LsHooks {
  /// Returns the search direction at (w, g). Charged work (pair sampling)
  /// happens in here.
  std::function<Vector(const Vector& w, const Vector& g, LsIterStats& stats)>
      direction;
  /// Called after every step so history-based methods can record a pair.
  std::function<void(const Vector& w_old, const Vector& g_old,
                     const Vector& w_new, const Vector& g_new,
                     LsIterStats& stats)>
      on_step;
};

RunResult run_linesearch(CountingObjective& obj, Vector w0,
                         const StepRule& rule, const Budget& budget,
                         TraceRecorder& trace, const LsHooks& hooks);

}  // namespace detail
}  // namespace sqn

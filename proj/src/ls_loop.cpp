#include "ls_loop.hpp"

#include <cmath>

#include "sqn/errors.hpp"

namespace sqn::detail {

RunResult run_linesearch(CountingObjective& obj, Vector w0,
                         const StepRule& rule, const Budget& budget,
                         TraceRecorder& trace, const LsHooks& hooks) {
  if (rule.mode == StepMode::constant && !(rule.alpha > 0.0)) {
    throw ConfigError("constant step length must be positive");
  }
  RunResult res;
  Vector w = std::move(w0);

  Vector g;
  try {
    g = obj.gradient(w);
  } catch (const NumericOverflowError& e) {
    res.aborted = true;
    res.abort_reason = e.what();
    res.w_final = w;
    return res;
  }
  double gnorm = norm2(g);
  double f = 0.0;
  bool have_f = false;
  std::int64_t iter = 0;
  if (!trace.log(iter, obj.meter().epochs(), w, gnorm, 0.0, 0, 0)) {
    res.aborted = true;
    res.abort_reason = "non-finite trace row";
  }

  while (!res.aborted && iter < budget.max_iters &&
         obj.meter().epochs() < budget.max_epochs && gnorm > budget.grad_tol) {
    LsIterStats stats;
    Vector p = hooks.direction(w, g, stats);

    double alpha_used = 0.0;
    double f_next = 0.0;
    bool have_f_next = false;
    if (rule.mode == StepMode::armijo) {
      if (!have_f) {
        f = obj.value(w);
        have_f = true;
      }
      bool steepest = false;
      for (;;) {
        try {
          const LineSearchResult ls = armijo_backtrack(obj, w, p, g, f,
                                                       rule.ls);
          alpha_used = ls.alpha;
          f_next = ls.f_new;
          have_f_next = true;
          break;
        } catch (const std::runtime_error& e) {
          if (steepest) {
            res.aborted = true;
            res.abort_reason =
                std::string("line search failed along steepest descent: ") +
                e.what();
            break;
          }
          // one retry along -g with the same search
          steepest = true;
          p = scaled(g, -1.0);
        }
      }
      if (res.aborted) break;
    } else {
      alpha_used = rule.alpha;
    }

    Vector w_new = w;
    axpy(alpha_used, p, w_new);
    if (!all_finite(w_new)) {
      res.aborted = true;
      res.abort_reason = "non-finite iterate";
      break;
    }
    Vector g_new;
    try {
      g_new = obj.gradient(w_new);
    } catch (const NumericOverflowError& e) {
      res.aborted = true;
      res.abort_reason = e.what();
      break;
    }
    if (!all_finite(g_new)) {
      res.aborted = true;
      res.abort_reason = "non-finite gradient";
      break;
    }
    if (hooks.on_step) hooks.on_step(w, g, w_new, g_new, stats);
    w = std::move(w_new);
    g = std::move(g_new);
    gnorm = norm2(g);
    if (have_f_next) f = f_next;
    ++iter;
    if (!trace.log(iter, obj.meter().epochs(), w, gnorm, alpha_used,
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

}  // namespace sqn::detail

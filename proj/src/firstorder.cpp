#include "sqn/firstorder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqn/errors.hpp"
#include "sqn/rng.hpp"
#include "ls_loop.hpp"

namespace sqn {

RunResult gd_run(CountingObjective& obj, const Vector& w0,
                 const StepRule& rule, const Budget& budget,
                 TraceRecorder& trace) {
  detail::LsHooks hooks;
  hooks.direction = [](const Vector&, const Vector& g,
                       detail::LsIterStats&) { return scaled(g, -1.0); };
  return detail::run_linesearch(obj, w0, rule, budget, trace, hooks);
}

void AdamHyper::validate() const {
  const bool ok = lr > 0.0 && beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 &&
                  beta2 < 1.0 && eps_hat > 0.0 && batch_size >= 1;
  if (!ok) throw ConfigError("invalid ADAM hyperparameters");
}

RunResult adam_run(CountingObjective& obj, const Vector& w0,
                   const AdamHyper& hyper, const Budget& budget,
                   std::uint64_t seed, TraceRecorder& trace) {
  hyper.validate();
  RunResult res;
  const std::size_t d = obj.dimension();
  const std::size_t n = obj.stochastic() ? obj.sample_count() : 1;
  const std::size_t batch =
      std::min<std::size_t>(static_cast<std::size_t>(hyper.batch_size), n);
  SplitMix64 rng(seed);

  Vector w = w0;
  Vector m(d, 0.0);
  Vector v(d, 0.0);
  std::int64_t t = 0;  // optimizer steps

  // diagnostic full gradient for the trace; not charged
  const auto diag_grad_norm = [&](const Vector& wk) {
    return norm2(obj.inner().gradient(wk));
  };

  double gnorm = diag_grad_norm(w);
  if (!trace.log(0, obj.meter().epochs(), w, gnorm, hyper.lr, 0, 0)) {
    res.aborted = true;
    res.abort_reason = "non-finite trace row";
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;  // forces a shuffle on first use
  std::int64_t next_epoch_mark = 1;

  while (!res.aborted && t < budget.max_iters &&
         obj.meter().epochs() < budget.max_epochs && gnorm > budget.grad_tol) {
    if (cursor >= n) {
      // full permutation per pass
      for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.next_index(i);
        std::swap(order[i - 1], order[j]);
      }
      cursor = 0;
    }
    const std::size_t take = std::min(batch, n - cursor);
    Vector g;
    if (obj.stochastic()) {
      g = obj.gradient_batch(
          w, std::span<const int>(order.data() + cursor, take));
    } else {
      g = obj.gradient(w);
    }
    cursor += take;

    ++t;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < d; ++i) {
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps_hat);
    }
    if (!all_finite(w)) {
      res.aborted = true;
      res.abort_reason = "non-finite iterate";
      break;
    }

    const double epochs_now = obj.meter().epochs();
    if (epochs_now >= static_cast<double>(next_epoch_mark) ||
        t >= budget.max_iters) {
      gnorm = diag_grad_norm(w);
      if (!trace.log(t, epochs_now, w, gnorm, hyper.lr, 0, 0)) {
        res.aborted = true;
        res.abort_reason = "non-finite trace row";
        break;
      }
      while (static_cast<double>(next_epoch_mark) <= epochs_now) {
        ++next_epoch_mark;
      }
    }
  }

  // final fractional row when the run stopped mid-pass
  if (!res.aborted && !trace.rows().empty() && trace.rows().back().iter != t) {
    gnorm = diag_grad_norm(w);
    if (!trace.log(t, obj.meter().epochs(), w, gnorm, hyper.lr, 0, 0)) {
      res.aborted = true;
      res.abort_reason = "non-finite trace row";
    }
  }

  res.rows = trace.rows();
  res.w_final = w;
  res.final_grad_norm = gnorm;
  return res;
}

double adam_tune_lr(const Objective& obj, const StochasticObjective* stoch,
                    const Vector& w0, const AdamHyper& base,
                    const Budget& budget, std::uint64_t seed) {
  double best_lr = base.lr;
  double best_loss = std::numeric_limits<double>::infinity();
  for (const double lr : kAdamLrGrid) {
    CountingObjective counting(obj, stoch);
    TraceRecorder trace(
        [&obj](const Vector& w) { return TraceEval{obj.value(w), -1, -1}; });
    AdamHyper hyper = base;
    hyper.lr = lr;
    const RunResult res = adam_run(counting, w0, hyper, budget, seed, trace);
    if (res.aborted || res.rows.empty()) continue;
    const double final_loss = res.rows.back().loss;
    if (std::isfinite(final_loss) && final_loss < best_loss) {
      best_loss = final_loss;
      best_lr = lr;
    }
  }
  return best_lr;
}

}  // namespace sqn

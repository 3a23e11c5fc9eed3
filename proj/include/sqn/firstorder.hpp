#pragma once

#include <cstdint>

#include "sqn/linesearch.hpp"
#include "sqn/objective.hpp"
#include "sqn/trace.hpp"

namespace sqn {

/// Gradient descent with Armijo (default) or constant steps.
RunResult gd_run(CountingObjective& obj, const Vector& w0,
                 const StepRule& rule, const Budget& budget,
                 TraceRecorder& trace);

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  int batch_size = 1;

  void validate() const;
};

/// Bias-corrected ADAM over shuffled mini-batches (full permutation per pass
/// from the run seed). Epochs accrue as samples touched / n, so k full
/// passes cost exactly k. Trace rows are emitted at the initial point and at
/// every integer epoch boundary; grad_norm in those rows is a diagnostic
/// full-batch gradient computed outside the meter. Objectives without a
/// mini-batch capability are treated as a single sample (one full gradient
/// per step, one epoch each).
RunResult adam_run(CountingObjective& obj, const Vector& w0,
                   const AdamHyper& hyper, const Budget& budget,
                   std::uint64_t seed, TraceRecorder& trace);

/// Step-length grid for the "well-tuned" runs.
inline constexpr double kAdamLrGrid[] = {1e-1, 1e-2, 1e-3, 1e-4};

/// Picks the grid learning rate with the best final training loss. Tuning
/// runs use their own meters and do not charge the caller's epoch budget
/// (tuning is out of band, like the reference experiments).
double adam_tune_lr(const Objective& obj, const StochasticObjective* stoch,
                    const Vector& w0, const AdamHyper& base,
                    const Budget& budget, std::uint64_t seed);

}  // namespace sqn

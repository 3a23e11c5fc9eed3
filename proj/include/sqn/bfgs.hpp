#pragma once

#include <cstdint>

#include "sqn/linesearch.hpp"
#include "sqn/objective.hpp"
#include "sqn/sampler.hpp"
#include "sqn/trace.hpp"

namespace sqn {

/// Ordered curvature pairs plus the scaling of the implicit initial inverse
/// Hessian H0 = gamma0 * I. Every stored pair must satisfy s'y > 0.
struct LbfgsMemory {
  struct Pair {
    Vector s;
    Vector y;
  };
  std::vector<Pair> pairs;  // oldest first
  double gamma0 = 1.0;
};

/// Inverse-Hessian rank-2 update
///   H' = (I - rho s y')' H (I - rho y s') + rho s s',  rho = 1/(y's).
/// Requires s'y > 1e-14 |s||y|; throws CurvatureError otherwise.
Matrix bfgs_update_dense(const Matrix& h, const Vector& s, const Vector& y);

/// Implicit product H*g over the stored pairs via the two-loop recursion.
/// Equals the dense matrix built by applying bfgs_update_dense sequentially
/// to gamma0*I over the same pairs. Empty memory yields gamma0 * g.
Vector two_loop(const LbfgsMemory& memory, const Vector& g);

struct PairFilterResult {
  CurvaturePairs kept;  // order preserved
  std::int64_t rejected = 0;
};

/// Keeps pairs with s'y >= eps * |s|^2 (the cautious curvature condition).
PairFilterResult filter_pairs_curvature(const CurvaturePairs& pairs,
                                        double eps);

/// Options shared by the sampled quasi-Newton runners.
struct SampledQnOptions {
  std::size_t memory = 16;             // pairs sampled per iteration
  double radius = 1.0;                 // sampling radius r
  double eps = 1e-8;                   // cautious threshold
  SampleOption option = SampleOption::II;
  double gamma = 1.0;                  // SR1 initial B0 = gamma*I (SR1 only)
};

/// Sampled LBFGS: fresh pairs each iteration, cautious filter, two-loop
/// direction with H0 scaled by s'y/y'y of a uniformly chosen accepted pair,
/// steepest descent when nothing is accepted.
RunResult slbfgs_run(CountingObjective& obj, const Vector& w0,
                     const SampledQnOptions& options, const StepRule& rule,
                     const Budget& budget, std::uint64_t seed,
                     TraceRecorder& trace);

/// Classical dense BFGS with history pairs s = w_k - w_{k-1},
/// y = grad difference. Pairs failing s'y > 1e-14|s||y| are skipped.
/// Refuses dimensions above 4096.
RunResult classical_bfgs_run(CountingObjective& obj, const Vector& w0,
                             const StepRule& rule, const Budget& budget,
                             TraceRecorder& trace);

/// Classical limited-memory BFGS over the m most recent history pairs with
/// H0 = I, so that with m >= iteration count it reproduces dense BFGS.
RunResult classical_lbfgs_run(CountingObjective& obj, const Vector& w0,
                              std::size_t memory, const StepRule& rule,
                              const Budget& budget, TraceRecorder& trace);

}  // namespace sqn

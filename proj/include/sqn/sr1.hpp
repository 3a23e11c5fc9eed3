#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "sqn/bfgs.hpp"
#include "sqn/objective.hpp"
#include "sqn/sampler.hpp"
#include "sqn/trace.hpp"
#include "sqn/trustregion.hpp"

namespace sqn {

enum class Sr1Update { applied, skipped_secant, skipped_cautious };

/// Rank-1 update B' = B + (y-Bs)(y-Bs)'/((y-Bs)'s), applied in place.
/// Skips (without touching B) when the secant residual y-Bs is negligible
/// or the cautious test |s'(y-Bs)| >= eps|s||y-Bs| fails. Indefinite
/// results are permitted.
Sr1Update sr1_update_dense(Matrix& b, const Vector& s, const Vector& y,
                           double eps);

/// Limited-memory SR1 Hessian in compact form
///   B = gamma*I + U (D + L + L' - gamma S'S)^{-1} U',  U = Y - gamma*S,
/// restricted to the pairs accepted by the recursive cautious check of the
/// construction: pair i is tested against the approximation built from the
/// previously accepted pairs, computed through the compact form itself.
/// With zero accepted pairs the representation degenerates to the identity.
class Sr1Compact {
 public:
  static Sr1Compact build(const CurvaturePairs& pairs, double gamma,
                          double eps);

  /// O(k d) product plus one k-by-k solve; never forms a d-by-d matrix.
  Vector product(const Vector& v) const;

  /// Dense materialization for spectrum diagnostics.
  Matrix densify(std::size_t dim) const;

  std::size_t accepted() const { return s_.size(); }
  std::size_t rejected() const { return rejected_; }
  bool identity_fallback() const { return fallback_; }
  double gamma() const { return gamma_; }
  const std::vector<Vector>& s_cols() const { return s_; }
  const std::vector<Vector>& y_cols() const { return y_; }

 private:
  Sr1Compact() = default;
  Vector product_over_accepted(const Vector& v) const;

  double gamma_ = 1.0;
  std::vector<Vector> s_;
  std::vector<Vector> y_;
  std::vector<Vector> u_;    // y - gamma*s per accepted column
  Matrix middle_entries_;    // D + L + L' - gamma S'S over accepted columns
  std::optional<LuFactor> middle_;
  std::size_t rejected_ = 0;
  bool fallback_ = false;
};

/// Spec-level aliases for the compact form entry points.
Sr1Compact build_compact(const CurvaturePairs& pairs, double gamma,
                         double eps);
Vector compact_hvp(const Sr1Compact& state, const Vector& v);

/// Power-iteration estimate of the largest |eigenvalue| of a symmetric
/// operator. Used for the boundedness probes and the Cauchy-decrease checks.
double operator_norm_estimate(const std::function<Vector(const Vector&)>& bv,
                              std::size_t dim, int iterations = 25,
                              std::uint64_t seed = 0x5eed5eedULL);

/// Sampled LSR1: fresh pairs each iteration feed the compact form; steps
/// come from the CG-Steihaug subproblem under the trust-region loop.
/// Model products cost no epochs; the rho numerator costs one.
RunResult slsr1_run(CountingObjective& obj, const Vector& w0,
                    const SampledQnOptions& options,
                    const TrustRegionParams& params, const Budget& budget,
                    std::uint64_t seed, TraceRecorder& trace);

/// History pairs recorded by the classical SR1 run, for the spectrum
/// diagnostics: all iterates (one per iteration, unchanged on rejected
/// steps) and every pair produced by an accepted step.
struct Sr1History {
  std::vector<Vector> iterates;  // w_0 .. w_T
  std::vector<LbfgsMemory::Pair> pairs;
  std::vector<std::int64_t> pair_iteration;  // 1-based producing iteration
};

/// Classical dense SR1 with trust region. History pairs from accepted steps;
/// skip rules as in sr1_update_dense. Refuses dimensions above 4096.
/// When history is non-null, iterates and pairs are recorded.
RunResult classical_sr1_run(CountingObjective& obj, const Vector& w0,
                            double eps, const TrustRegionParams& params,
                            const Budget& budget, TraceRecorder& trace,
                            Sr1History* history = nullptr);

/// Classical limited-memory SR1: the compact form is rebuilt each iteration
/// over the m most recent history pairs.
RunResult classical_lsr1_run(CountingObjective& obj, const Vector& w0,
                             std::size_t memory, double gamma, double eps,
                             const TrustRegionParams& params,
                             const Budget& budget, TraceRecorder& trace);

}  // namespace sqn

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sqn/objective.hpp"
#include "sqn/rng.hpp"

namespace sqn {

enum class SampleOption { I, II };

/// Fresh curvature pairs built around one iterate. S holds the iterate
/// displacements s = w - wbar = -r*sigma; Y holds gradient differences
/// (Option I) or Hessian products along s (Option II).
struct CurvaturePairs {
  std::vector<Vector> s;
  std::vector<Vector> y;
  SampleOption option = SampleOption::II;
  double radius = 1.0;

  std::size_t size() const { return s.size(); }
};

/// Builds m pairs at w given the already-computed gradient g, drawing
/// directions with i.i.d. standard normal components from rng. Charges
/// m gradients under Option I or one batched Hessian product under
/// Option II; the gradient at w itself is the caller's.
CurvaturePairs sample_pairs_with_gradient(CountingObjective& obj,
                                          const Vector& w, const Vector& g,
                                          std::size_t m, double r,
                                          SampleOption option,
                                          SplitMix64& rng);

/// Algorithm entry point: computes the gradient at w (one epoch), then
/// samples. Returns the pairs together with that gradient so callers never
/// pay for it twice.
std::pair<CurvaturePairs, Vector> sample_pairs(CountingObjective& obj,
                                               const Vector& w, std::size_t m,
                                               double r, SampleOption option,
                                               std::uint64_t seed);

}  // namespace sqn

#include "sqn/sampler.hpp"

#include <string>

#include "sqn/errors.hpp"

namespace sqn {

namespace {

Vector draw_direction(std::size_t d, SplitMix64& rng) {
  Vector sigma(d);
  for (double& v : sigma) v = rng.next_gaussian();
  if (norm2(sigma) == 0.0) {
    // probability-zero draw; one redraw, then give up
    for (double& v : sigma) v = rng.next_gaussian();
    if (norm2(sigma) == 0.0) {
      throw NumericOverflowError("degenerate zero sampling direction");
    }
  }
  return sigma;
}

}  // namespace

CurvaturePairs sample_pairs_with_gradient(CountingObjective& obj,
                                          const Vector& w, const Vector& g,
                                          std::size_t m, double r,
                                          SampleOption option,
                                          SplitMix64& rng) {
  if (m < 1) throw ConfigError("pair count m must be at least 1");
  if (!(r > 0.0)) throw ConfigError("sampling radius must be positive");
  const std::size_t d = obj.dimension();

  CurvaturePairs pairs;
  pairs.option = option;
  pairs.radius = r;
  pairs.s.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Vector sigma = draw_direction(d, rng);
    scale(sigma, -r);  // s = w - (w + r*sigma)
    pairs.s.push_back(std::move(sigma));
  }

  if (option == SampleOption::II) {
    pairs.y = obj.hvp_batch(w, pairs.s);
  } else {
    pairs.y.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Vector wbar = w;
      axpy(-1.0, pairs.s[i], wbar);  // wbar = w + r*sigma
      Vector gbar;
      try {
        gbar = obj.gradient(wbar);
      } catch (const NumericOverflowError& e) {
        throw NumericOverflowError(std::string(e.what()) +
                                   " (sampled column " + std::to_string(i) +
                                   ")");
      }
      pairs.y.push_back(sub(g, gbar));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!all_finite(pairs.y[i]) || !all_finite(pairs.s[i])) {
      throw NumericOverflowError("non-finite curvature pair at column " +
                                 std::to_string(i));
    }
  }
  return pairs;
}

std::pair<CurvaturePairs, Vector> sample_pairs(CountingObjective& obj,
                                               const Vector& w, std::size_t m,
                                               double r, SampleOption option,
                                               std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector g = obj.gradient(w);
  CurvaturePairs pairs =
      sample_pairs_with_gradient(obj, w, g, m, r, option, rng);
  return {std::move(pairs), std::move(g)};
}

}  // namespace sqn

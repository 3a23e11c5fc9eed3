#include "sqn/sr1.hpp"

#include <cmath>
#include <deque>
#include <memory>

#include "sqn/errors.hpp"
#include "sqn/rng.hpp"
#include "tr_loop.hpp"

namespace sqn {

namespace {

constexpr double kSecantResidualTol = 1e-12;
constexpr std::size_t kDenseDimGuard = 4096;

}  // namespace

Sr1Update sr1_update_dense(Matrix& b, const Vector& s, const Vector& y,
                           double eps) {
  if (!(eps > 0.0)) throw ConfigError("cautious threshold must be positive");
  const std::size_t n = s.size();
  if (!b.square() || b.rows() != n || y.size() != n) {
    throw DimensionError("sr1_update_dense size mismatch");
  }
  Vector residual = matvec(b, s);
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - residual[i];
  const double res_norm = norm2(residual);
  if (res_norm <= kSecantResidualTol * std::max(1.0, norm2(y))) {
    return Sr1Update::skipped_secant;
  }
  const double denom = dot(s, residual);
  if (std::fabs(denom) < eps * norm2(s) * res_norm) {
    return Sr1Update::skipped_cautious;
  }
  rank1_update(b, 1.0 / denom, residual, residual);
  b.symmetrize();
  return Sr1Update::applied;
}

Vector Sr1Compact::product_over_accepted(const Vector& v) const {
  Vector out = scaled(v, gamma_);
  if (s_.empty()) return out;
  Vector t(s_.size());
  for (std::size_t i = 0; i < u_.size(); ++i) t[i] = dot(u_[i], v);
  const Vector z = middle_->solve(t);
  for (std::size_t i = 0; i < u_.size(); ++i) axpy(z[i], u_[i], out);
  return out;
}

Vector Sr1Compact::product(const Vector& v) const {
  if (fallback_) return v;  // B = I
  return product_over_accepted(v);
}

Matrix Sr1Compact::densify(std::size_t dim) const {
  Matrix b(dim, dim);
  Vector e(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    const Vector col = product(e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < dim; ++i) b(i, j) = col[i];
  }
  b.symmetrize();
  return b;
}

Sr1Compact Sr1Compact::build(const CurvaturePairs& pairs, double gamma,
                             double eps) {
  if (!(gamma > 0.0)) throw ConfigError("sr1 gamma must be positive");
  if (!(eps > 0.0)) throw ConfigError("cautious threshold must be positive");
  Sr1Compact c;
  c.gamma_ = gamma;

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vector& s = pairs.s[i];
    const Vector& y = pairs.y[i];
    const Vector bs = c.product_over_accepted(s);
    Vector residual(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) residual[k] = y[k] - bs[k];
    const double res_norm = norm2(residual);
    if (res_norm <= kSecantResidualTol * std::max(1.0, norm2(y))) {
      ++c.rejected_;
      continue;
    }
    if (std::fabs(dot(s, residual)) < eps * norm2(s) * res_norm) {
      ++c.rejected_;
      continue;
    }
    // Tentatively extend the middle matrix
    //   M = D + L + L' - gamma S'S,  M_ij = s_max(i,j)' y_min(i,j) - gamma s_i's_j
    // by one row/column (the accepted block is cached) and refactor.
    const std::size_t k = c.s_.size() + 1;
    Matrix middle(k, k);
    for (std::size_t a = 0; a + 1 < k; ++a) {
      for (std::size_t bcol = 0; bcol + 1 < k; ++bcol) {
        middle(a, bcol) = c.middle_entries_(a, bcol);
      }
    }
    for (std::size_t bcol = 0; bcol + 1 < k; ++bcol) {
      const double m_kb =
          dot(s, c.y_[bcol]) - gamma * dot(s, c.s_[bcol]);
      middle(k - 1, bcol) = m_kb;
      middle(bcol, k - 1) = m_kb;
    }
    middle(k - 1, k - 1) = dot(s, y) - gamma * dot(s, s);
    auto factor = LuFactor::factor(middle);
    if (!factor) {
      ++c.rejected_;
      continue;
    }
    c.s_.push_back(s);
    c.y_.push_back(y);
    Vector u = y;
    axpy(-gamma, s, u);
    c.u_.push_back(std::move(u));
    c.middle_entries_ = std::move(middle);
    c.middle_ = std::move(factor);
  }

  if (c.s_.empty()) {
    c.fallback_ = true;
    c.gamma_ = 1.0;
  }
  return c;
}

Sr1Compact build_compact(const CurvaturePairs& pairs, double gamma,
                         double eps) {
  return Sr1Compact::build(pairs, gamma, eps);
}

Vector compact_hvp(const Sr1Compact& state, const Vector& v) {
  return state.product(v);
}

double operator_norm_estimate(const std::function<Vector(const Vector&)>& bv,
                              std::size_t dim, int iterations,
                              std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector v(dim);
  for (double& x : v) x = rng.next_gaussian();
  double nv = norm2(v);
  if (nv == 0.0) {
    v.assign(dim, 1.0);
    nv = std::sqrt(static_cast<double>(dim));
  }
  scale(v, 1.0 / nv);
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector bvv = bv(v);
    estimate = norm2(bvv);
    if (!std::isfinite(estimate)) return estimate;
    if (estimate == 0.0) return 0.0;
    scale(bvv, 1.0 / estimate);
    v = std::move(bvv);
  }
  return estimate;
}

RunResult slsr1_run(CountingObjective& obj, const Vector& w0,
                    const SampledQnOptions& options,
                    const TrustRegionParams& params, const Budget& budget,
                    std::uint64_t seed, TraceRecorder& trace) {
  SplitMix64 rng(seed);
  std::int64_t iteration = 0;
  detail::TrHooks hooks;
  hooks.build_model = [&](const Vector& w, const Vector& g,
                          detail::TrIterStats& stats) -> ProductOracle {
    const CurvaturePairs pairs = sample_pairs_with_gradient(
        obj, w, g, options.memory, options.radius, options.option, rng);
    auto compact = std::make_shared<Sr1Compact>(
        Sr1Compact::build(pairs, options.gamma, options.eps));
    stats.pairs_sampled = static_cast<std::int64_t>(pairs.size());
    stats.pairs_accepted = static_cast<std::int64_t>(compact->accepted());
    auto product = [compact](const Vector& v) { return compact->product(v); };
    stats.approx_norm_probe = operator_norm_estimate(
        product, w.size(), 25, seed ^ static_cast<std::uint64_t>(++iteration));
    return product;
  };
  return detail::run_trust_region(obj, w0, params, budget, trace, hooks);
}

RunResult classical_sr1_run(CountingObjective& obj, const Vector& w0,
                            double eps, const TrustRegionParams& params,
                            const Budget& budget, TraceRecorder& trace,
                            Sr1History* history) {
  const std::size_t d = obj.dimension();
  if (d > kDenseDimGuard) {
    throw DimensionError("dense SR1 refuses dimension above 4096");
  }
  auto b = std::make_shared<Matrix>(Matrix::identity(d));
  std::int64_t iteration = 0;

  if (history) {
    history->iterates.clear();
    history->pairs.clear();
    history->pair_iteration.clear();
    history->iterates.push_back(w0);
  }

  detail::TrHooks hooks;
  hooks.build_model = [b, d, &iteration](const Vector&, const Vector&,
                                         detail::TrIterStats& stats)
      -> ProductOracle {
    auto product = [b](const Vector& v) { return matvec(*b, v); };
    stats.approx_norm_probe = operator_norm_estimate(
        product, d, 25, 0x51c1ULL ^ static_cast<std::uint64_t>(++iteration));
    return product;
  };
  hooks.on_accept = [b, eps, history, &iteration](
                        const Vector& w_old, const Vector& g_old,
                        const Vector& w_new, const Vector& g_new,
                        detail::TrIterStats& stats) {
    Vector s = sub(w_new, w_old);
    Vector y = sub(g_new, g_old);
    stats.pairs_sampled = 1;
    if (sr1_update_dense(*b, s, y, eps) == Sr1Update::applied) {
      stats.pairs_accepted = 1;
    }
    if (history) {
      history->pairs.push_back({std::move(s), std::move(y)});
      history->pair_iteration.push_back(iteration);
    }
  };
  if (history) {
    hooks.on_iteration = [history](const Vector& w) {
      history->iterates.push_back(w);
    };
  }

  return detail::run_trust_region(obj, w0, params, budget, trace, hooks);
}

RunResult classical_lsr1_run(CountingObjective& obj, const Vector& w0,
                             std::size_t memory, double gamma, double eps,
                             const TrustRegionParams& params,
                             const Budget& budget, TraceRecorder& trace) {
  if (memory < 1) throw ConfigError("lsr1 memory must be at least 1");
  auto pairs = std::make_shared<std::deque<LbfgsMemory::Pair>>();
  std::int64_t iteration = 0;

  detail::TrHooks hooks;
  hooks.build_model = [pairs, gamma, eps, &iteration](
                          const Vector& w, const Vector&,
                          detail::TrIterStats& stats) -> ProductOracle {
    CurvaturePairs cp;
    for (const auto& pr : *pairs) {
      cp.s.push_back(pr.s);
      cp.y.push_back(pr.y);
    }
    auto compact = std::make_shared<Sr1Compact>(
        Sr1Compact::build(cp, gamma, eps));
    stats.pairs_sampled = static_cast<std::int64_t>(cp.size());
    stats.pairs_accepted = static_cast<std::int64_t>(compact->accepted());
    auto product = [compact](const Vector& v) { return compact->product(v); };
    stats.approx_norm_probe = operator_norm_estimate(
        product, w.size(), 25,
        0x15f1ULL ^ static_cast<std::uint64_t>(++iteration));
    return product;
  };
  hooks.on_accept = [pairs, memory](const Vector& w_old, const Vector& g_old,
                                    const Vector& w_new, const Vector& g_new,
                                    detail::TrIterStats&) {
    pairs->push_back({sub(w_new, w_old), sub(g_new, g_old)});
    if (pairs->size() > memory) pairs->pop_front();
  };

  return detail::run_trust_region(obj, w0, params, budget, trace, hooks);
}

}  // namespace sqn

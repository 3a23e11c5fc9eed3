#include "sqn/bfgs.hpp"

#include <cmath>
#include <deque>

#include "sqn/errors.hpp"
#include "ls_loop.hpp"

namespace sqn {

namespace {

constexpr double kPairTol = 1e-14;
constexpr std::size_t kDenseDimGuard = 4096;

bool pair_usable(const Vector& s, const Vector& y) {
  return dot(s, y) > kPairTol * norm2(s) * norm2(y);
}

}  // namespace

Matrix bfgs_update_dense(const Matrix& h, const Vector& s, const Vector& y) {
  const std::size_t n = s.size();
  if (!h.square() || h.rows() != n || y.size() != n) {
    throw DimensionError("bfgs_update_dense size mismatch");
  }
  const double sy = dot(s, y);
  if (!(sy > kPairTol * norm2(s) * norm2(y))) {
    throw CurvatureError("curvature condition s'y > 0 violated");
  }
  const double rho_k = 1.0 / sy;

  // H' = V' H V + rho s s',  V = I - rho y s'
  const Vector hy = matvec(h, y);
  const double yhy = dot(y, hy);
  Matrix out = h;
  // - rho (s (Hy)' + (Hy) s') + rho^2 y'Hy s s' + rho s s'
  rank1_update(out, -rho_k, s, hy);
  rank1_update(out, -rho_k, hy, s);
  rank1_update(out, rho_k * rho_k * yhy + rho_k, s, s);
  out.symmetrize();
  return out;
}

Vector two_loop(const LbfgsMemory& memory, const Vector& g) {
  const std::size_t m = memory.pairs.size();
  Vector q = g;
  std::vector<double> alpha(m, 0.0);
  std::vector<double> rho_cache(m, 0.0);
  for (std::size_t idx = m; idx-- > 0;) {
    const auto& pr = memory.pairs[idx];
    rho_cache[idx] = 1.0 / dot(pr.s, pr.y);
    alpha[idx] = rho_cache[idx] * dot(pr.s, q);
    axpy(-alpha[idx], pr.y, q);
  }
  scale(q, memory.gamma0);
  for (std::size_t idx = 0; idx < m; ++idx) {
    const auto& pr = memory.pairs[idx];
    const double beta = rho_cache[idx] * dot(pr.y, q);
    axpy(alpha[idx] - beta, pr.s, q);
  }
  return q;
}

PairFilterResult filter_pairs_curvature(const CurvaturePairs& pairs,
                                        double eps) {
  if (!(eps > 0.0)) throw ConfigError("cautious threshold must be positive");
  PairFilterResult res;
  res.kept.option = pairs.option;
  res.kept.radius = pairs.radius;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vector& s = pairs.s[i];
    const Vector& y = pairs.y[i];
    if (dot(s, y) >= eps * dot(s, s)) {
      res.kept.s.push_back(s);
      res.kept.y.push_back(y);
    } else {
      ++res.rejected;
    }
  }
  return res;
}

RunResult slbfgs_run(CountingObjective& obj, const Vector& w0,
                     const SampledQnOptions& options, const StepRule& rule,
                     const Budget& budget, std::uint64_t seed,
                     TraceRecorder& trace) {
  SplitMix64 rng(seed);
  detail::LsHooks hooks;
  hooks.direction = [&](const Vector& w, const Vector& g,
                        detail::LsIterStats& stats) -> Vector {
    const CurvaturePairs pairs = sample_pairs_with_gradient(
        obj, w, g, options.memory, options.radius, options.option, rng);
    PairFilterResult filtered = filter_pairs_curvature(pairs, options.eps);
    stats.pairs_sampled = static_cast<std::int64_t>(pairs.size());
    stats.pairs_accepted = static_cast<std::int64_t>(filtered.kept.size());
    if (filtered.kept.size() == 0) {
      return scaled(g, -1.0);  // H = I fallback
    }
    LbfgsMemory mem;
    const std::size_t l = rng.next_index(filtered.kept.size());
    mem.gamma0 =
        dot(filtered.kept.s[l], filtered.kept.y[l]) /
        dot(filtered.kept.y[l], filtered.kept.y[l]);
    mem.pairs.reserve(filtered.kept.size());
    for (std::size_t i = 0; i < filtered.kept.size(); ++i) {
      mem.pairs.push_back({std::move(filtered.kept.s[i]),
                           std::move(filtered.kept.y[i])});
    }
    return scaled(two_loop(mem, g), -1.0);
  };
  return detail::run_linesearch(obj, w0, rule, budget, trace, hooks);
}

RunResult classical_bfgs_run(CountingObjective& obj, const Vector& w0,
                             const StepRule& rule, const Budget& budget,
                             TraceRecorder& trace) {
  const std::size_t d = obj.dimension();
  if (d > kDenseDimGuard) {
    throw DimensionError("dense BFGS refuses dimension above 4096");
  }
  Matrix h = Matrix::identity(d);
  detail::LsHooks hooks;
  hooks.direction = [&h](const Vector&, const Vector& g,
                         detail::LsIterStats&) -> Vector {
    return scaled(matvec(h, g), -1.0);
  };
  hooks.on_step = [&h](const Vector& w_old, const Vector& g_old,
                       const Vector& w_new, const Vector& g_new,
                       detail::LsIterStats& stats) {
    const Vector s = sub(w_new, w_old);
    const Vector y = sub(g_new, g_old);
    stats.pairs_sampled = 1;
    if (pair_usable(s, y)) {
      h = bfgs_update_dense(h, s, y);
      stats.pairs_accepted = 1;
    }
  };
  return detail::run_linesearch(obj, w0, rule, budget, trace, hooks);
}

RunResult classical_lbfgs_run(CountingObjective& obj, const Vector& w0,
                              std::size_t memory, const StepRule& rule,
                              const Budget& budget, TraceRecorder& trace) {
  if (memory < 1) throw ConfigError("lbfgs memory must be at least 1");
  std::deque<LbfgsMemory::Pair> history;
  detail::LsHooks hooks;
  hooks.direction = [&history](const Vector&, const Vector& g,
                               detail::LsIterStats&) -> Vector {
    LbfgsMemory mem;  // H0 = I, matching the dense method's start
    mem.pairs.assign(history.begin(), history.end());
    return scaled(two_loop(mem, g), -1.0);
  };
  hooks.on_step = [&history, memory](const Vector& w_old, const Vector& g_old,
                                     const Vector& w_new, const Vector& g_new,
                                     detail::LsIterStats& stats) {
    Vector s = sub(w_new, w_old);
    Vector y = sub(g_new, g_old);
    stats.pairs_sampled = 1;
    if (pair_usable(s, y)) {
      history.push_back({std::move(s), std::move(y)});
      if (history.size() > memory) history.pop_front();
      stats.pairs_accepted = 1;
    }
  };
  return detail::run_linesearch(obj, w0, rule, budget, trace, hooks);
}

}  // namespace sqn

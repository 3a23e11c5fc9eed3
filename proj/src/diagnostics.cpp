#include "sqn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sqn/errors.hpp"
#include "sqn/sampler.hpp"
#include "sqn/sr1.hpp"
#include "sqn/trustregion.hpp"

namespace sqn {

namespace {

constexpr double kEps = 1e-8;

Vector approx_eigs_dense_sr1(const Sr1History& history, std::int64_t upto,
                             std::size_t d, std::int64_t* skipped) {
  Matrix b = Matrix::identity(d);
  *skipped = 0;
  for (std::size_t i = 0; i < history.pairs.size(); ++i) {
    if (history.pair_iteration[i] > upto) break;
    if (sr1_update_dense(b, history.pairs[i].s, history.pairs[i].y, kEps) !=
        Sr1Update::applied) {
      ++*skipped;
    }
  }
  return sym_eigenvalues(b);
}

}  // namespace

std::vector<std::int64_t> default_checkpoints(std::int64_t iterations) {
  const std::int64_t lo = iterations / 4;
  const std::int64_t hi = iterations - 1;
  return {lo, (lo + hi) / 2, hi};
}

std::vector<SpectrumSnapshot> spectrum_run(
    const Objective& obj, const Vector& w0, std::int64_t iterations,
    std::size_t m, double r, const std::vector<std::int64_t>& checkpoints,
    std::uint64_t seed) {
  if (iterations < 1) throw ConfigError("spectrum run needs iterations >= 1");
  for (std::int64_t c : checkpoints) {
    if (c < 0 || c >= iterations) {
      throw ConfigError("spectrum checkpoint outside [0, iterations)");
    }
  }
  const std::size_t d = obj.dimension();

  // classical SR1 with full history retention
  CountingObjective counting(obj);
  TraceRecorder trace([](const Vector&) { return TraceEval{}; });
  Budget budget;
  budget.max_iters = iterations;
  budget.grad_tol = 0.0;
  Sr1History history;
  classical_sr1_run(counting, w0, kEps, TrustRegionParams{}, budget, trace,
                    &history);

  std::vector<SpectrumSnapshot> out;
  out.reserve(checkpoints.size());
  for (std::int64_t c : checkpoints) {
    SpectrumSnapshot snap;
    snap.checkpoint = c;
    const std::size_t idx = std::min<std::size_t>(
        static_cast<std::size_t>(c), history.iterates.size() - 1);
    snap.iterate = history.iterates[idx];

    snap.true_eigs = sym_eigenvalues(full_hessian(obj, snap.iterate));
    snap.sr1_eigs =
        approx_eigs_dense_sr1(history, c, d, &snap.sr1_skipped);

    // limited-memory rebuild over the m most recent pairs up to c
    CurvaturePairs recent;
    std::size_t upto = 0;
    for (std::size_t i = 0; i < history.pairs.size(); ++i) {
      if (history.pair_iteration[i] > c) break;
      upto = i + 1;
    }
    const std::size_t first = upto > m ? upto - m : 0;
    for (std::size_t i = first; i < upto; ++i) {
      recent.s.push_back(history.pairs[i].s);
      recent.y.push_back(history.pairs[i].y);
    }
    const Sr1Compact lsr1 = Sr1Compact::build(recent, 1.0, kEps);
    snap.lsr1_accepted = static_cast<std::int64_t>(lsr1.accepted());
    snap.lsr1_eigs = sym_eigenvalues(lsr1.densify(d));

    // fresh sampled pairs at the checkpoint iterate (gradient differences)
    CountingObjective sampler_obj(obj);
    SplitMix64 rng(seed ^ (0x5becULL + static_cast<std::uint64_t>(c)));
    const Vector g = sampler_obj.gradient(snap.iterate);
    const CurvaturePairs sampled = sample_pairs_with_gradient(
        sampler_obj, snap.iterate, g, m, r, SampleOption::I, rng);
    const Sr1Compact slsr1 = Sr1Compact::build(sampled, 1.0, kEps);
    snap.slsr1_accepted = static_cast<std::int64_t>(slsr1.accepted());
    snap.slsr1_fallback = slsr1.identity_fallback();
    snap.slsr1_eigs = sym_eigenvalues(slsr1.densify(d));

    out.push_back(std::move(snap));
  }
  return out;
}

double spectrum_match(const Vector& a, const Vector& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc / static_cast<double>(n);
}

std::string spectrum_to_csv(const SpectrumSnapshot& snap) {
  std::string out = "checkpoint,source,index,eigenvalue\n";
  const auto emit = [&](const char* source, const Vector& eigs) {
    for (std::size_t i = 0; i < eigs.size(); ++i) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%lld,%s,%zu,%.17g\n",
                    static_cast<long long>(snap.checkpoint), source, i,
                    eigs[i]);
      out += buf;
    }
  };
  emit("true", snap.true_eigs);
  emit("sr1", snap.sr1_eigs);
  emit("lsr1", snap.lsr1_eigs);
  emit("slsr1", snap.slsr1_eigs);
  out += "# sr1_skipped," + std::to_string(snap.sr1_skipped) + "\n";
  out += "# slsr1_fallback," + std::string(snap.slsr1_fallback ? "1" : "0") +
         "\n";
  return out;
}

}  // namespace sqn

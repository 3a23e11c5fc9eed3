#include <doctest.h>

#include <cmath>

#include "sqn/bfgs.hpp"
#include "sqn/harness.hpp"
#include "sqn/mlp.hpp"
#include "sqn/quadratic.hpp"
#include "test_support.hpp"

using namespace sqn;

namespace {

TraceRecorder quadratic_recorder(const QuadraticObjective& q) {
  return TraceRecorder(
      [&q](const Vector& w) { return TraceEval{q.value(w), -1.0, -1.0}; });
}

}  // namespace

TEST_CASE("dense update hand example and secant") {
  Matrix h = Matrix::identity(2);
  h(0, 0) = h(1, 1) = 0.5;
  const Vector s = {1.0, 0.0};
  const Vector y = {2.0, 0.0};
  const Matrix hp = bfgs_update_dense(h, s, y);
  CHECK(hp(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(hp(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(hp(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  const Vector hy = matvec(hp, y);
  CHECK(hy[0] == doctest::Approx(s[0]).epsilon(1e-14));
  CHECK(hy[1] == doctest::Approx(s[1]).epsilon(1e-14));
}

TEST_CASE("secant residual over random SPD matrices and valid pairs") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.next_index(7);
    const Matrix base = random_spd(n, 10.0, rng);
    const auto prs = oracle::random_curvature_pairs(n, 1, rng);
    const Matrix hp = bfgs_update_dense(base, prs[0].s, prs[0].y);
    Vector residual = matvec(hp, prs[0].y);
    axpy(-1.0, prs[0].s, residual);
    CHECK(norm2(residual) <= 1e-12 * std::max(1.0, norm2(prs[0].s)));
  }
}

TEST_CASE("curvature violation raises") {
  Matrix h = Matrix::identity(2);
  CHECK_THROWS_AS(bfgs_update_dense(h, {1.0, 0.0}, {-1.0, 0.0}),
                  CurvatureError);
}

TEST_CASE("two-loop on empty memory scales the gradient") {
  LbfgsMemory mem;
  mem.gamma0 = 0.25;
  const Vector r = two_loop(mem, {4.0, -8.0});
  CHECK(r[0] == 1.0);
  CHECK(r[1] == -2.0);
}

TEST_CASE("two-loop single-pair example matches the dense update") {
  LbfgsMemory mem;
  mem.pairs.push_back({{1.0, 0.0}, {2.0, 0.0}});
  mem.gamma0 = 0.5;  // s'y / y'y
  const Vector r = two_loop(mem, {4.0, 0.0});
  CHECK(r[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("two-loop equals the dense chain (d=12, five pairs)") {
  SplitMix64 rng(12);
  const auto prs = oracle::random_curvature_pairs(12, 5, rng);
  const double gamma0 =
      dot(prs.back().s, prs.back().y) / dot(prs.back().y, prs.back().y);
  const Matrix dense = oracle::dense_bfgs_chain(gamma0, prs, 12);
  LbfgsMemory mem;
  mem.pairs = prs;
  mem.gamma0 = gamma0;
  for (int probe = 0; probe < 20; ++probe) {
    Vector g(12);
    for (double& v : g) v = rng.next_gaussian();
    const Vector a = two_loop(mem, g);
    const Vector b = matvec(dense, g);
    CHECK(oracle::rel_err(a, b) <= 1e-10);
  }
}

TEST_CASE("curvature filter") {
  CurvaturePairs pairs;
  pairs.s = {{1.0, 0.0}, {1.0, 0.0}};
  pairs.y = {{2.0, 0.0}, {-1.0, 0.0}};
  const PairFilterResult res = filter_pairs_curvature(pairs, 1e-8);
  CHECK(res.kept.size() == 1);
  CHECK(res.rejected == 1);
  CHECK(res.kept.y[0][0] == 2.0);
}

TEST_CASE("option II pairs on a strongly convex quadratic all pass the filter") {
  SplitMix64 rng(31);
  const Matrix a = random_spd(6, 100.0, rng);  // lambda_min = 1 > eps
  const QuadraticObjective q(a, Vector(6, 0.0));
  CountingObjective obj(q);
  Vector w(6);
  for (double& v : w) v = rng.next_gaussian();
  const auto [pairs, g] = sample_pairs(obj, w, 8, 1.0, SampleOption::II, 77);
  const PairFilterResult res = filter_pairs_curvature(pairs, 1e-8);
  CHECK(res.rejected == 0);
  CHECK(res.kept.size() == 8);
}

TEST_CASE("sampled LBFGS decays geometrically on an SPD quadratic") {
  SplitMix64 rng(37);
  const Matrix a = random_spd(10, 100.0, rng);
  Vector target(10);
  for (double& v : target) v = rng.next_gaussian();
  const QuadraticObjective q(a, matvec(a, target));
  const double fstar = q.min_value();

  CountingObjective obj(q);
  TraceRecorder trace = quadratic_recorder(q);
  SampledQnOptions opts;
  opts.memory = 10;
  StepRule rule;
  rule.mode = StepMode::constant;
  rule.alpha = 0.5;
  Budget budget;
  budget.max_iters = 60;
  budget.grad_tol = 0.0;
  Vector w0(10);
  for (double& v : w0) v = rng.next_gaussian();
  const RunResult res = slbfgs_run(obj, w0, opts, rule, budget, 7, trace);
  CHECK(!res.aborted);

  double prev_gap = res.rows.front().loss - fstar;
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    const double gap = res.rows[i].loss - fstar;
    if (prev_gap < 1e-12 * (res.rows.front().loss - fstar)) break;
    CHECK(gap <= 0.999 * prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("already converged start logs only the initial row") {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 5.0;
  const QuadraticObjective q(a, {2.0, 5.0});
  CountingObjective obj(q);
  TraceRecorder trace = quadratic_recorder(q);
  Budget budget;
  const RunResult res = slbfgs_run(obj, {1.0, 1.0}, SampledQnOptions{},
                                   StepRule{}, budget, 3, trace);
  CHECK(res.rows.size() == 1);
  CHECK(obj.meter().epochs() == 1.0);  // the initial gradient only
}

TEST_CASE("identical config and seed reproduce the trace") {
  const MlpSpec spec = build_network("small");
  const MlpObjective mlp(spec, gen_toy_dataset(7));
  const auto eval = [&](const Vector& w) {
    const LossAccuracy la = loss_accuracy(spec, w, mlp.data());
    return TraceEval{la.loss, la.accuracy, -1.0};
  };
  Budget budget;
  budget.max_iters = 8;
  const Vector w0 = init_params(spec, 5, 0.5);

  std::vector<TraceRow> first;
  for (int rep = 0; rep < 2; ++rep) {
    CountingObjective obj(mlp);
    TraceRecorder trace(eval);
    const RunResult res =
        slbfgs_run(obj, w0, SampledQnOptions{}, StepRule{}, budget, 99, trace);
    if (rep == 0) {
      first = res.rows;
    } else {
      REQUIRE(first.size() == res.rows.size());
      for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].loss == res.rows[i].loss);
        CHECK(first[i].grad_norm == res.rows[i].grad_norm);
        CHECK(first[i].step_or_delta == res.rows[i].step_or_delta);
        CHECK(first[i].pairs_accepted == res.rows[i].pairs_accepted);
      }
    }
  }
}

TEST_CASE("classical BFGS first step is steepest descent") {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 5.0;
  const QuadraticObjective q(a, Vector(2, 0.0));
  CountingObjective obj(q);
  TraceRecorder trace = quadratic_recorder(q);
  Budget budget;
  budget.max_iters = 1;
  const RunResult res =
      classical_bfgs_run(obj, {1.0, 1.0}, StepRule{}, budget, trace);
  REQUIRE(res.rows.size() == 2);
  // with H = I the direction is -g; Armijo from alpha0 = 1 backtracks along it
  const Vector g0 = q.gradient({1.0, 1.0});
  const double alpha = res.rows[1].step_or_delta;
  const Vector expect = {1.0 - alpha * g0[0], 1.0 - alpha * g0[1]};
  CHECK(res.w_final[0] == doctest::Approx(expect[0]).epsilon(1e-14));
  CHECK(res.w_final[1] == doctest::Approx(expect[1]).epsilon(1e-14));
}

TEST_CASE("LBFGS with large memory tracks dense BFGS on a quadratic") {
  SplitMix64 rng(41);
  const Matrix a = random_spd(6, 30.0, rng);
  Vector target(6);
  for (double& v : target) v = rng.next_gaussian();
  const QuadraticObjective q(a, matvec(a, target));
  Vector w0(6);
  for (double& v : w0) v = rng.next_gaussian();
  Budget budget;
  budget.max_iters = 15;
  budget.grad_tol = 1e-12;

  CountingObjective o1(q);
  TraceRecorder t1 = quadratic_recorder(q);
  const RunResult dense = classical_bfgs_run(o1, w0, StepRule{}, budget, t1);
  CountingObjective o2(q);
  TraceRecorder t2 = quadratic_recorder(q);
  const RunResult lm =
      classical_lbfgs_run(o2, w0, 64, StepRule{}, budget, t2);

  REQUIRE(dense.rows.size() == lm.rows.size());
  Vector diff = sub(dense.w_final, lm.w_final);
  CHECK(norm2(diff) <= 1e-8 * std::max(1.0, norm2(dense.w_final)));
}

TEST_CASE("classical BFGS descends monotonically under Armijo") {
  SplitMix64 rng(43);
  const Matrix a = random_spd(4, 10.0, rng);
  const QuadraticObjective q(a, Vector(4, 0.0));
  CountingObjective obj(q);
  TraceRecorder trace = quadratic_recorder(q);
  Budget budget;
  budget.max_iters = 8;
  Vector w0(4);
  for (double& v : w0) v = rng.next_gaussian();
  const RunResult res = classical_bfgs_run(obj, w0, StepRule{}, budget, trace);
  CHECK(!res.aborted);
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    CHECK(res.rows[i].loss < res.rows[i - 1].loss);
    CHECK(res.rows[i].pairs_sampled == 1);  // one history pair per step
  }
}

TEST_CASE("SPD preservation probes under cautious filtering") {
  SplitMix64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.next_index(10);
    const auto prs = oracle::random_curvature_pairs(n, 4, rng);
    LbfgsMemory mem;
    mem.pairs = prs;
    mem.gamma0 =
        dot(prs[0].s, prs[0].y) / dot(prs[0].y, prs[0].y);
    const Matrix dense = oracle::dense_bfgs_chain(mem.gamma0, prs, n);
    for (int probe = 0; probe < 5; ++probe) {
      Vector v(n);
      for (double& e : v) e = rng.next_gaussian();
      CHECK(dot(v, two_loop(mem, v)) > 0.0);
      CHECK(dot(v, matvec(dense, v)) > 0.0);
    }
  }
}

TEST_CASE("option II radius invariance of the S-LBFGS trajectory") {
  SplitMix64 rng(53);
  const Matrix a = random_spd(8, 60.0, rng);
  Vector target(8);
  for (double& v : target) v = rng.next_gaussian();
  const QuadraticObjective q(a, matvec(a, target));
  Vector w0(8);
  for (double& v : w0) v = rng.next_gaussian();
  Budget budget;
  budget.max_iters = 10;
  budget.grad_tol = 0.0;

  RunResult runs[2];
  const double radii[2] = {1.0, 100.0};
  for (int k = 0; k < 2; ++k) {
    CountingObjective obj(q);
    TraceRecorder trace = quadratic_recorder(q);
    SampledQnOptions opts;
    opts.memory = 6;
    opts.radius = radii[k];
    runs[k] = slbfgs_run(obj, w0, opts, StepRule{}, budget, 11, trace);
  }
  Vector diff = sub(runs[0].w_final, runs[1].w_final);
  CHECK(norm2(diff) <= 1e-10 * std::max(1.0, norm2(runs[0].w_final)));
}

TEST_CASE("Armijo S-LBFGS strictly decreases F on the toy problem") {
  const MlpSpec spec = build_network("small");
  const MlpObjective mlp(spec, gen_toy_dataset(9));
  CountingObjective obj(mlp);
  TraceRecorder trace([&](const Vector& w) {
    const LossAccuracy la = loss_accuracy(spec, w, mlp.data());
    return TraceEval{la.loss, la.accuracy, -1.0};
  });
  Budget budget;
  budget.max_iters = 15;
  const RunResult res = slbfgs_run(obj, init_params(spec, 21, 0.5),
                                   SampledQnOptions{}, StepRule{}, budget, 55,
                                   trace);
  CHECK(!res.aborted);
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    CHECK(res.rows[i].loss < res.rows[i - 1].loss);
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sqn/linalg.hpp"
#include "sqn/quadratic.hpp"
#include "sqn/rng.hpp"
#include "test_support.hpp"

using namespace sqn;

namespace {

Matrix random_symmetric(std::size_t n, SplitMix64& rng) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = rng.next_uniform(-2.0, 2.0);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

}  // namespace

TEST_CASE("sym_eig identity") {
  const EigResult r = sym_eig(Matrix::identity(3));
  for (double v : r.eigenvalues) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("sym_eig diagonal") {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  a(2, 2) = 3.0;
  const EigResult r = sym_eig(a);
  CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(r.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(r.eigenvalues[2] == doctest::Approx(3.0));
  // eigenvectors are standard basis vectors up to sign
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 3; ++i) {
      const double want = i == c ? 1.0 : 0.0;
      CHECK(std::fabs(r.eigenvectors(i, c)) == doctest::Approx(want));
    }
  }
}

TEST_CASE("sym_eig random 5x5 vs characteristic polynomial roots") {
  SplitMix64 rng(42);
  const Matrix a = random_symmetric(5, rng);
  const Vector got = sym_eigenvalues(a);
  Vector want = oracle::char_poly_roots(a, 5);
  REQUIRE(want.size() == 5);
  std::sort(want.begin(), want.end());
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-8));
  }
}

TEST_CASE("sym_eig residuals and orthonormality") {
  SplitMix64 rng(7);
  const Matrix a = random_symmetric(8, rng);
  const EigResult r = sym_eig(a);
  const double scale = a.max_abs();
  for (std::size_t c = 0; c < 8; ++c) {
    Vector v(8);
    for (std::size_t i = 0; i < 8; ++i) v[i] = r.eigenvectors(i, c);
    Vector av = matvec(a, v);
    axpy(-r.eigenvalues[c], v, av);
    CHECK(norm2(av) <= 1e-8 * std::max(1.0, scale));
    for (std::size_t c2 = 0; c2 <= c; ++c2) {
      Vector v2(8);
      for (std::size_t i = 0; i < 8; ++i) v2[i] = r.eigenvectors(i, c2);
      CHECK(std::fabs(dot(v, v2) - (c == c2 ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("sym_eig trace and determinant invariants") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.next_index(9);  // up to 10
    const Matrix a = random_symmetric(n, rng);
    const Vector eigs = sym_eigenvalues(a);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
    double esum = 0.0;
    double eprod = 1.0;
    for (double v : eigs) {
      esum += v;
      eprod *= v;
    }
    CHECK(esum == doctest::Approx(trace).epsilon(1e-8));
    const auto lu = LuFactor::factor(a);
    if (lu) {
      CHECK(eprod == doctest::Approx(lu->det()).epsilon(1e-6));
    }
  }
}

TEST_CASE("sym_eig rejects bad input") {
  Matrix rect(2, 3);
  CHECK_THROWS_AS(sym_eig(rect), DimensionError);
  Matrix asym(2, 2);
  asym(0, 1) = 1.0;
  asym(1, 0) = -1.0;
  CHECK_THROWS_AS(sym_eig(asym), DimensionError);
}

TEST_CASE("solve_dense identity and diagonal") {
  CHECK(solve_dense(Matrix::identity(2), {3.0, -1.0}) ==
        Vector{3.0, -1.0});
  Matrix d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  const Vector x = solve_dense(d, {2.0, 4.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("solve_dense zero matrix is singular") {
  Matrix z(2, 2);
  CHECK_THROWS_AS(solve_dense(z, {1.0, 0.0}), SingularSystemError);
}

TEST_CASE("solve_dense residual bound on random systems") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next_index(12);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.next_gaussian();
      a(i, i) += 4.0;  // keep comfortably nonsingular
    }
    Vector b(n);
    for (double& v : b) v = rng.next_gaussian();
    const Vector x = solve_dense(a, b);
    Vector residual = matvec(a, x);
    axpy(-1.0, b, residual);
    CHECK(norm2(residual) <= 1e-10 * std::max(1.0, norm2(b)));
  }
}

TEST_CASE("matrix helpers") {
  CHECK_THROWS_AS(Matrix(0, 1), DimensionError);
  Matrix a(2, 2);
  a(0, 1) = 1.0 + 5e-13;
  a(1, 0) = 1.0;
  CHECK(a.is_symmetric());
  a(0, 1) = 1.1;
  CHECK(!a.is_symmetric());
  a.symmetrize();
  CHECK(a(0, 1) == doctest::Approx(1.05));
  CHECK(a(0, 1) == a(1, 0));
}

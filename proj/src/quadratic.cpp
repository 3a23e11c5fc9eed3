#include "sqn/quadratic.hpp"

#include <cmath>

#include "sqn/errors.hpp"

namespace sqn {

Matrix random_orthogonal(std::size_t n, SplitMix64& rng) {
  Matrix q(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vector col(n);
    for (double& v : col) v = rng.next_gaussian();
    for (std::size_t prev = 0; prev < j; ++prev) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += q(i, prev) * col[i];
      for (std::size_t i = 0; i < n; ++i) col[i] -= proj * q(i, prev);
    }
    const double nrm = norm2(col);
    if (nrm < 1e-10) {
      // essentially dependent draw; restart the column
      --j;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) q(i, j) = col[i] / nrm;
  }
  return q;
}

Matrix random_spd(std::size_t n, double cond, SplitMix64& rng) {
  if (!(cond >= 1.0)) throw ConfigError("condition number must be >= 1");
  const Matrix q = random_orthogonal(n, rng);
  Vector lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t =
        n == 1 ? 0.0
               : static_cast<double>(i) / static_cast<double>(n - 1);
    lambda[i] = std::pow(cond, t);
  }
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += q(i, k) * lambda[k] * q(j, k);
      }
      a(i, j) = acc;
    }
  }
  a.symmetrize();
  return a;
}

QuadraticObjective::QuadraticObjective(Matrix a, Vector b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (!a_.square() || a_.rows() != b_.size()) {
    throw DimensionError("quadratic objective size mismatch");
  }
  if (!a_.is_symmetric()) {
    throw DimensionError("quadratic objective requires symmetric A");
  }
  const Vector eigs = sym_eigenvalues(a_);
  lambda_min_ = eigs.front();
  lambda_max_ = eigs.back();
  if (lambda_min_ <= 0.0) {
    throw DimensionError("quadratic objective requires positive definite A");
  }
}

double QuadraticObjective::value(const Vector& w) const {
  const Vector aw = matvec(a_, w);
  return 0.5 * dot(w, aw) - dot(b_, w);
}

Vector QuadraticObjective::gradient(const Vector& w) const {
  Vector g = matvec(a_, w);
  axpy(-1.0, b_, g);
  return g;
}

Vector QuadraticObjective::hvp(const Vector& /*w*/, const Vector& v) const {
  return matvec(a_, v);
}

Vector QuadraticObjective::minimizer() const { return solve_dense(a_, b_); }

double QuadraticObjective::min_value() const { return value(minimizer()); }

}  // namespace sqn

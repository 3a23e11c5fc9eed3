#pragma once

#include "sqn/objective.hpp"
#include "sqn/rng.hpp"

namespace sqn {

/// Random orthogonal matrix: modified Gram-Schmidt over a Gaussian matrix.
Matrix random_orthogonal(std::size_t n, SplitMix64& rng);

/// Random SPD matrix Q diag(lambda) Q' with log-spaced eigenvalues in
/// [1, cond], so the condition number is exactly cond.
Matrix random_spd(std::size_t n, double cond, SplitMix64& rng);

/// Strongly convex test problem F(w) = 0.5 w'Aw - b'w with A symmetric
/// positive definite (asserted at construction via the eigensolver).
/// The minimizer A^{-1} b is exposed for tests.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Matrix a, Vector b);

  std::size_t dimension() const override { return b_.size(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  Vector hvp(const Vector& w, const Vector& v) const override;

  const Matrix& matrix() const { return a_; }
  Vector minimizer() const;
  double min_value() const;
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

 private:
  Matrix a_;
  Vector b_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

}  // namespace sqn

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sqn/errors.hpp"

namespace sqn {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Vector helpers. Everything is plain 64-bit arithmetic over std::vector.
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
bool all_finite(std::span<const double> a);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, Vector& y);
void scale(Vector& x, double alpha);
Vector scaled(const Vector& x, double alpha);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);

// ---------------------------------------------------------------------------
// Dense matrix, row-major. rows >= 1 and cols >= 1 are enforced.
// ---------------------------------------------------------------------------

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool square() const { return rows_ == cols_; }

  /// Largest |entry|.
  double max_abs() const;

  /// |A[i][j] - A[j][i]| <= 1e-12 * max(1, |A[i][j]|) for all i, j.
  bool is_symmetric(double rel_tol = 1e-12) const;

  /// (A + A^T) / 2 in place. Square matrices only.
  void symmetrize();

  Matrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vector matvec(const Matrix& a, std::span<const double> x);
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);

/// A += alpha * u v^T
void rank1_update(Matrix& a, double alpha, std::span<const double> u,
                  std::span<const double> v);

// ---------------------------------------------------------------------------
// LU with partial pivoting. The factorization is reused for repeated solves
// against the small middle matrix of the compact SR1 form.
// ---------------------------------------------------------------------------

class LuFactor {
 public:
  /// Returns nullopt when a pivot falls below rel_pivot_tol * max|A|.
  static std::optional<LuFactor> factor(const Matrix& a,
                                        double rel_pivot_tol = 1e-12);

  Vector solve(std::span<const double> b) const;
  double det() const;
  std::size_t dim() const { return lu_.rows(); }

 private:
  LuFactor() = default;
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
};

/// Direct solve of A x = b. Throws SingularSystemError / DimensionError.
Vector solve_dense(const Matrix& a, const Vector& b);

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition by cyclic Jacobi rotations. Intended for the
// moderate dimensions of the spectrum diagnostics (guarded at 2500).
// ---------------------------------------------------------------------------

struct EigResult {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns, column i pairs with value i
};

EigResult sym_eig(const Matrix& a);

/// Eigenvalues only, ascending. Same Jacobi sweep without accumulating V.
Vector sym_eigenvalues(const Matrix& a);

}  // namespace sqn

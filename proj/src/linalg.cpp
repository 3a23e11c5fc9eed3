#include "sqn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sqn {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void axpy(double alpha, std::span<const double> x, Vector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(Vector& x, double alpha) {
  for (double& v : x) v *= alpha;
}

Vector scaled(const Vector& x, double alpha) {
  Vector out(x);
  scale(out, alpha);
  return out;
}

Vector add(const Vector& a, const Vector& b) {
  Vector out(a);
  axpy(1.0, b, out);
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  Vector out(a);
  axpy(-1.0, b, out);
  return out;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows < 1 || cols < 1) {
    throw DimensionError("matrix dimensions must be at least 1x1");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

bool Matrix::is_symmetric(double rel_tol) const {
  if (!square()) return false;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      const double aij = (*this)(i, j);
      const double aji = (*this)(j, i);
      const double bound =
          rel_tol * std::max(1.0, std::max(std::fabs(aij), std::fabs(aji)));
      if (std::fabs(aij - aji) > bound) return false;
    }
  }
  return true;
}

void Matrix::symmetrize() {
  if (!square()) throw DimensionError("symmetrize requires a square matrix");
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      const double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
      (*this)(i, j) = v;
      (*this)(j, i) = v;
    }
  }
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw DimensionError("matvec size mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) throw DimensionError("matvec size mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul size mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

void rank1_update(Matrix& a, double alpha, std::span<const double> u,
                  std::span<const double> v) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double au = alpha * u[i];
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += au * v[j];
  }
}

std::optional<LuFactor> LuFactor::factor(const Matrix& a,
                                         double rel_pivot_tol) {
  if (!a.square()) throw DimensionError("LU requires a square matrix");
  const std::size_t n = a.rows();
  LuFactor f;
  f.lu_ = a;
  f.perm_.resize(n);
  std::iota(f.perm_.begin(), f.perm_.end(), std::size_t{0});
  const double pivot_floor = rel_pivot_tol * std::max(a.max_abs(), 0.0);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot_row = k;
    double pivot_mag = std::fabs(f.lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double mag = std::fabs(f.lu_(i, k));
      if (mag > pivot_mag) {
        pivot_mag = mag;
        pivot_row = i;
      }
    }
    if (pivot_mag <= pivot_floor || pivot_mag == 0.0) return std::nullopt;
    if (pivot_row != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(f.lu_(k, j), f.lu_(pivot_row, j));
      }
      std::swap(f.perm_[k], f.perm_[pivot_row]);
      f.sign_ = -f.sign_;
    }
    const double inv_pivot = 1.0 / f.lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double lik = f.lu_(i, k) * inv_pivot;
      f.lu_(i, k) = lik;
      if (lik == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) {
        f.lu_(i, j) -= lik * f.lu_(k, j);
      }
    }
  }
  return f;
}

Vector LuFactor::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw DimensionError("solve rhs size mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  // forward: L has unit diagonal
  for (std::size_t i = 1; i < n; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
    x[i] = acc;
  }
  // backward
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= lu_(ii, j) * x[j];
    x[ii] = acc / lu_(ii, ii);
  }
  return x;
}

double LuFactor::det() const {
  double d = static_cast<double>(sign_);
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

Vector solve_dense(const Matrix& a, const Vector& b) {
  if (!a.square()) throw DimensionError("solve_dense requires square A");
  if (b.size() != a.rows()) throw DimensionError("solve_dense rhs mismatch");
  auto f = LuFactor::factor(a);
  if (!f) throw SingularSystemError("numerically singular system");
  return f->solve(b);
}

namespace {

constexpr std::size_t kEigDimGuard = 2500;

double off_diagonal_frobenius(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) acc += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(acc);
}

double frobenius(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

void check_sym_eig_input(const Matrix& a) {
  if (!a.square()) throw DimensionError("sym_eig requires a square matrix");
  if (a.rows() > kEigDimGuard) {
    throw DimensionError("sym_eig dimension guard exceeded");
  }
  if (!a.is_symmetric()) {
    throw DimensionError("sym_eig requires a symmetric matrix");
  }
}

/// One full cyclic sweep of Jacobi rotations over the upper triangle.
/// Accumulates rotations into v when v is non-null.
void jacobi_sweep(Matrix& a, Matrix* v) {
  const std::size_t n = a.rows();
  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double apq = a(p, q);
      if (apq == 0.0) continue;
      const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
      const double t =
          (theta >= 0.0 ? 1.0 : -1.0) /
          (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
      }
      if (v != nullptr) {
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = (*v)(k, p);
          const double vkq = (*v)(k, q);
          (*v)(k, p) = c * vkp - s * vkq;
          (*v)(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
}

void jacobi_diagonalize(Matrix& a, Matrix* v) {
  const double tol = 1e-12 * std::max(frobenius(a), 1e-300);
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_frobenius(a) <= tol) return;
    jacobi_sweep(a, v);
  }
}

}  // namespace

EigResult sym_eig(const Matrix& a) {
  check_sym_eig_input(a);
  const std::size_t n = a.rows();
  Matrix work = a;
  work.symmetrize();
  Matrix v = Matrix::identity(n);
  jacobi_diagonalize(work, &v);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return work(i, i) < work(j, j);
  });

  EigResult res;
  res.eigenvalues.resize(n);
  res.eigenvectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    res.eigenvalues[c] = work(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) {
      res.eigenvectors(r, c) = v(r, order[c]);
    }
  }
  return res;
}

Vector sym_eigenvalues(const Matrix& a) {
  check_sym_eig_input(a);
  Matrix work = a;
  work.symmetrize();
  jacobi_diagonalize(work, nullptr);
  Vector vals(work.rows());
  for (std::size_t i = 0; i < work.rows(); ++i) vals[i] = work(i, i);
  std::sort(vals.begin(), vals.end());
  return vals;
}

}  // namespace sqn

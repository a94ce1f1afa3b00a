#include "mbern/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mbern/errors.hpp"

namespace mbern {

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) throw InvalidMatrix("matrix has non-finite entries");
}

void require_same_dim(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw InvalidMatrix("symmetric matrix must be square and non-empty");
  }
  require_finite(entries);
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double skew = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (skew > kSkewTol * scale) {
    throw InvalidMatrix("matrix is not symmetric (skew " + std::to_string(skew) + ")");
  }
  m_ = 0.5 * (entries + entries.transpose());
}

SymMatrix SymMatrix::zero(Index dim) { return {Matrix::Zero(dim, dim), Trusted{}}; }

SymMatrix SymMatrix::identity(Index dim) { return {Matrix::Identity(dim, dim), Trusted{}}; }

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  Vector v(static_cast<Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) v(static_cast<Index>(i)) = diag[i];
  return diagonal(v);
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  if (diag.size() == 0) throw InvalidMatrix("empty diagonal");
  require_finite(diag);
  return {Matrix(diag.asDiagonal()), Trusted{}};
}

SymMatrix SymMatrix::symmetrized(const Matrix& entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw InvalidMatrix("symmetric matrix must be square and non-empty");
  }
  require_finite(entries);
  return {0.5 * (entries + entries.transpose()), Trusted{}};
}

SymMatrix SymMatrix::outer(const Vector& v) {
  require_finite(v);
  return {v * v.transpose(), Trusted{}};
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  require_same_dim(*this, other);
  return {m_ + other.m_, Trusted{}};
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  require_same_dim(*this, other);
  return {m_ - other.m_, Trusted{}};
}

SymMatrix SymMatrix::operator-() const { return {-m_, Trusted{}}; }

SymMatrix SymMatrix::operator*(double s) const { return {m_ * s, Trusted{}}; }

SymMatrix SymMatrix::squared() const { return symmetrized(m_ * m_); }

EigPair eig_sym(const SymMatrix& a) {
  require_finite(a.entries());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw InvalidMatrix("eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Vector eigenvalues(const SymMatrix& a) {
  require_finite(a.entries());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InvalidMatrix("eigendecomposition failed");
  return solver.eigenvalues();
}

double lambda_max(const SymMatrix& a) { return eigenvalues(a).maxCoeff(); }

double lambda_min(const SymMatrix& a) { return eigenvalues(a).minCoeff(); }

SymMatrix apply_spectral_fn(const SymMatrix& a, const std::function<double(double)>& f) {
  const EigPair e = eig_sym(a);
  Vector mapped(e.values.size());
  for (Index i = 0; i < e.values.size(); ++i) {
    mapped(i) = f(e.values(i));
    if (!std::isfinite(mapped(i))) {
      throw DomainError("spectral function is not finite at eigenvalue " +
                        std::to_string(e.values(i)));
    }
  }
  return SymMatrix::symmetrized(e.vectors * mapped.asDiagonal() * e.vectors.transpose());
}

double op_norm(const SymMatrix& a) { return eigenvalues(a).cwiseAbs().maxCoeff(); }

bool psd_order(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a, b);
  return lambda_min(a - b) >= -tol;
}

double trace_unit_truncation(const SymMatrix& a) {
  const Vector ev = eigenvalues(a);
  if (ev.minCoeff() < -1e-10) {
    throw NotPSD("trace_unit_truncation needs a nonnegative-definite matrix (lambda_min = " +
                 std::to_string(ev.minCoeff()) + ")");
  }
  double total = 0.0;
  for (Index i = 0; i < ev.size(); ++i) total += std::clamp(ev(i), 0.0, 1.0);
  return total;
}

SymMatrix paulsen_dilate(const Vector& y) {
  const Index d = y.size();
  Matrix m = Matrix::Zero(d + 1, d + 1);
  m.block(1, 0, d, 1) = y;
  m.block(0, 1, 1, d) = y.transpose();
  return SymMatrix(m);
}

SymMatrix project_leading(const SymMatrix& a, Index j) {
  if (j < 1 || j > a.dim()) {
    throw DomainError("projection rank " + std::to_string(j) + " outside [1, " +
                      std::to_string(a.dim()) + "]");
  }
  Matrix m = Matrix::Zero(a.dim(), a.dim());
  m.topLeftCorner(j, j) = a.entries().topLeftCorner(j, j);
  return SymMatrix(m);
}

SymMatrix matrix_exp(const SymMatrix& a) {
  return apply_spectral_fn(a, [](double x) { return std::exp(x); });
}

SymMatrix matrix_log(const SymMatrix& a) {
  if (lambda_min(a) <= 1e-12) throw DomainError("matrix_log needs a positive-definite matrix");
  return apply_spectral_fn(a, [](double x) { return std::log(x); });
}

}  // namespace mbern

#pragma once

// Dense real symmetric matrices and the spectral calculus built on them.
//
// Every operator-valued quantity in the library (summands, partial sums,
// variance proxies, integral-operator discretizations) is a SymMatrix. The
// type is immutable once built: arithmetic returns new values.

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace mbern {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigendecomposition tolerances. Downstream checks derive from these.
inline constexpr double kOrthonormalityTol = 1e-10;
inline constexpr double kReconstructionTol = 1e-9;
// Largest skew |A - A^T| (scaled by max(1, max|A|)) accepted at construction.
inline constexpr double kSkewTol = 1e-12;

class SymMatrix {
 public:
  // Validates finiteness and symmetry, then stores (M + M^T) / 2.
  explicit SymMatrix(const Matrix& entries);

  static SymMatrix zero(Index dim);
  static SymMatrix identity(Index dim);
  static SymMatrix diagonal(std::span<const double> diag);
  static SymMatrix diagonal(const Vector& diag);
  // Symmetrizes without the skew check. For results of products whose
  // asymmetry is pure round-off.
  static SymMatrix symmetrized(const Matrix& entries);
  // Outer product v v^T.
  static SymMatrix outer(const Vector& v);

  Index dim() const { return m_.rows(); }
  const Matrix& entries() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator-() const;
  SymMatrix operator*(double s) const;
  friend SymMatrix operator*(double s, const SymMatrix& a) { return a * s; }

  // A * A, symmetrized.
  SymMatrix squared() const;

 private:
  struct Trusted {};
  SymMatrix(Matrix entries, Trusted) : m_(std::move(entries)) {}

  Matrix m_;
};

struct EigPair {
  Vector values;   // ascending
  Matrix vectors;  // columns are orthonormal eigenvectors
};

EigPair eig_sym(const SymMatrix& a);
// Ascending eigenvalues without eigenvectors.
Vector eigenvalues(const SymMatrix& a);

double lambda_max(const SymMatrix& a);
double lambda_min(const SymMatrix& a);

// T f(Lambda) T^T. Throws DomainError if f is non-finite on the spectrum.
SymMatrix apply_spectral_fn(const SymMatrix& a, const std::function<double(double)>& f);

// Largest absolute eigenvalue.
double op_norm(const SymMatrix& a);

// True iff lambda_min(a - b) >= -tol.
bool psd_order(const SymMatrix& a, const SymMatrix& b, double tol);

// sum_i min(lambda_i(a), 1) for a nonnegative-definite `a`. Equals tr p(-a)
// with p(t) = min(-t, 1). Throws NotPSD if lambda_min(a) < -1e-10.
double trace_unit_truncation(const SymMatrix& a);

// [[0, y^T], [y, 0]], a (d+1)x(d+1) symmetric embedding of y.
SymMatrix paulsen_dilate(const Vector& y);

// P A P with P the coordinate projector onto the first j coordinates.
SymMatrix project_leading(const SymMatrix& a, Index j);

SymMatrix matrix_exp(const SymMatrix& a);
// Requires lambda_min(a) > 1e-12.
SymMatrix matrix_log(const SymMatrix& a);

}  // namespace mbern

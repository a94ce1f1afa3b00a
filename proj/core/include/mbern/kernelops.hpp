#pragma once

// Integral operators of positive definite kernels: Gram matrices, empirical
// and quadrature reference operators, and their deviation in the RKHS
// operator norm.
//
// Points are stored as rows of a Matrix (n x input_dim).

#include <cstdint>
#include <vector>

#include "mbern/bounds.hpp"
#include "mbern/spectral.hpp"

namespace mbern {

enum class KernelFamily {
  gaussian,    // exp(-|x - y|^2 / (2 h^2))
  polynomial,  // (<x, y> + c)^q
};

std::string_view to_string(KernelFamily f);
KernelFamily kernel_family_from_string(std::string_view name);

// Memory guard on the total number of quadrature nodes.
inline constexpr Index kMaxQuadratureNodes = 8192;

struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double bandwidth = 1.0;  // gaussian
  int degree = 1;          // polynomial
  double offset = 0.0;     // polynomial, >= 0
  std::vector<double> lower{0.0};
  std::vector<double> upper{1.0};

  static KernelSpec gaussian(double h, std::vector<double> lower = {0.0},
                             std::vector<double> upper = {1.0});
  static KernelSpec polynomial(int q, double c, std::vector<double> lower = {0.0},
                               std::vector<double> upper = {1.0});

  // Throws InvalidSpec.
  void validate() const;
  Index input_dim() const { return static_cast<Index>(lower.size()); }
  bool contains(const Vector& x) const;
  double operator()(const Vector& x, const Vector& y) const;
};

// sup_x K(x, x): 1 for the gaussian family, a 10^4-point grid search
// (corners included) otherwise.
double kernel_sup(const KernelSpec& spec);

struct SampleSet {
  Matrix points;
  SymMatrix gram;  // (1/n) K(X_i, X_j)
};

// K(points_i, points_j) / n. Throws DomainError for points outside the domain.
SymMatrix gram(const KernelSpec& spec, const Matrix& points);
// Unscaled kernel matrix between two point sets.
Matrix cross_kernel(const KernelSpec& spec, const Matrix& a, const Matrix& b);

// n iid uniform points; pure in (seed, trial).
SampleSet draw_sample(const KernelSpec& spec, Index n, std::uint64_t seed, std::uint64_t trial);

// Descending eigenvalues with negatives above -1e-10 set to 0. Throws NotPSD below.
std::vector<double> empirical_operator_eigs(const SymMatrix& g);

// Tensor midpoint grid with m nodes per axis.
Matrix quadrature_nodes(const KernelSpec& spec, Index m);
// (1/N) K(z_i, z_j) over the N quadrature nodes.
SymMatrix reference_operator(const KernelSpec& spec, Index m);

// Nonzero spectrum (ascending) of sum_p w_p K_p (x) K_p, computed from the
// joint Gram matrix G: eig(B^T W B) with G = B B^T after dropping Gram
// eigenvalues below floor * lambda_max(G).
struct JointSpectrum {
  Vector values;
  Index rank = 0;           // retained Gram directions
  Index floored = 0;        // dropped Gram directions
  double condition = 0.0;   // lambda_max / smallest retained eigenvalue
};
inline constexpr double kWhiteningFloor = 1e-12;
JointSpectrum joint_operator_spectrum(const KernelSpec& spec, const Matrix& points,
                                      const Vector& weights, double floor = kWhiteningFloor);

struct DeviationReport {
  double deviation = 0.0;
  JointSpectrum spectrum;
};
// || L_{K,n} - L_K || on the joint system over quadrature nodes and sample
// points. Cost is cubic in (nodes + samples).
DeviationReport operator_deviation_joint(const KernelSpec& spec, const Matrix& points, Index m);

// Low-rank orthonormal coordinates for the span of the quadrature kernel
// sections, from pivoted Cholesky of the node kernel matrix. In these
// coordinates L_K is diag(mu) and <., K_x> K_x is phi(x) phi(x)^T.
class NystromBasis {
 public:
  static constexpr double kPivotTol = 1e-12;

  NystromBasis(const KernelSpec& spec, Index m);

  const KernelSpec& spec() const { return spec_; }
  Index nodes() const { return nodes_.rows(); }
  Index rank() const { return static_cast<Index>(mu_.size()); }
  // Descending eigenvalues of the reference operator.
  const Vector& reference_eigenvalues() const { return mu_; }
  // Largest diagonal residual of the node factorization.
  double node_residual() const { return node_residual_; }

  // Rows phi(x_i).
  Matrix features(const Matrix& points) const;
  // max_i K(x_i, x_i) - |phi(x_i)|^2.
  double residual(const Matrix& points) const;
  SymMatrix empirical_representation(const Matrix& points) const;
  SymMatrix reference_representation() const;
  // phi(x) phi(x)^T - diag(mu).
  SymMatrix xi_representation(const Vector& x) const;
  // E[K(X,X) phi phi^T] - diag(mu^2).
  SymMatrix xi_second_moment() const;
  double operator_deviation(const Matrix& points) const;

 private:
  KernelSpec spec_;
  Matrix nodes_;
  std::vector<Index> pivots_;
  Matrix pivot_factor_;  // lower triangular, rank x rank
  Matrix rotation_;      // columns: eigenvectors of the node covariance, descending
  Vector mu_;
  Matrix node_features_;  // rows phi(z_j)
  double node_residual_ = 0.0;
};

double operator_deviation(const NystromBasis& basis, const SampleSet& sample);

struct XiParameters {
  double kappa = 0.0;
  double lk_norm = 0.0;
  double xi_intdim = 1.0;
};
XiParameters xi_parameters(const NystromBasis& basis);
XiParameters xi_parameters(const KernelSpec& spec, Index m);

// |xi_intdim(m) - xi_intdim(2m)|: the discretization error reported next to
// every certificate.
double xi_refinement_delta(const KernelSpec& spec, Index m);

BoundResult cor10_certificate(const XiParameters& xi, std::int64_t n, double t);
BoundResult cor10_certificate(const KernelSpec& spec, std::int64_t n, double t, Index m);

// max(sqrt(kappa ||L_K|| / n), 1 / n).
double cor10_threshold(const XiParameters& xi, std::int64_t n);

}  // namespace mbern

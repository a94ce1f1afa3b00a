#include "mbern/kernelops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mbern/errors.hpp"
#include "mbern/rng.hpp"

namespace mbern {

namespace {

constexpr double kPsdTol = 1e-10;

Vector row_vector(const Matrix& points, Index i) { return points.row(i).transpose(); }

}  // namespace

std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::polynomial:
      return "polynomial";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "polynomial") return KernelFamily::polynomial;
  throw InvalidSpec("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec KernelSpec::gaussian(double h, std::vector<double> lower, std::vector<double> upper) {
  KernelSpec s;
  s.family = KernelFamily::gaussian;
  s.bandwidth = h;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  s.validate();
  return s;
}

KernelSpec KernelSpec::polynomial(int q, double c, std::vector<double> lower,
                                  std::vector<double> upper) {
  KernelSpec s;
  s.family = KernelFamily::polynomial;
  s.degree = q;
  s.offset = c;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw InvalidSpec("domain bounds must be non-empty and of equal length");
  }
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) || !(lower[k] < upper[k])) {
      throw InvalidSpec("domain must be a non-degenerate finite box");
    }
  }
  if (family == KernelFamily::gaussian) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw InvalidSpec("gaussian bandwidth must be positive");
    }
  } else {
    if (degree < 1) throw InvalidSpec("polynomial degree must be >= 1");
    if (!(offset >= 0.0) || !std::isfinite(offset)) {
      throw InvalidSpec("polynomial offset must be >= 0");
    }
  }
}

bool KernelSpec::contains(const Vector& x) const {
  if (x.size() != input_dim()) return false;
  for (Index k = 0; k < x.size(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (!(x(k) >= lower[ku] && x(k) <= upper[ku])) return false;
  }
  return true;
}

double KernelSpec::operator()(const Vector& x, const Vector& y) const {
  if (family == KernelFamily::gaussian) {
    return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
  }
  return std::pow(x.dot(y) + offset, degree);
}

double kernel_sup(const KernelSpec& spec) {
  spec.validate();
  if (spec.family == KernelFamily::gaussian) return 1.0;
  const Index dim = spec.input_dim();
  const auto per_axis = std::max<Index>(
      2, static_cast<Index>(std::floor(std::pow(1e4, 1.0 / static_cast<double>(dim)) + 1e-9)));
  Index total = 1;
  for (Index k = 0; k < dim; ++k) total *= per_axis;
  double best = 0.0;
  Vector x(dim);
  for (Index flat = 0; flat < total; ++flat) {
    Index rest = flat;
    for (Index k = 0; k < dim; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const Index i = rest % per_axis;
      rest /= per_axis;
      const double frac = static_cast<double>(i) / static_cast<double>(per_axis - 1);
      x(k) = spec.lower[ku] + frac * (spec.upper[ku] - spec.lower[ku]);
    }
    best = std::max(best, std::abs(spec(x, x)));
  }
  return best;
}

Matrix cross_kernel(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  if (a.cols() != spec.input_dim() || b.cols() != spec.input_dim()) {
    throw DimensionMismatch("points do not match the kernel input dimension");
  }
  Matrix k(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const Vector x = row_vector(a, i);
    for (Index j = 0; j < b.rows(); ++j) k(i, j) = spec(x, row_vector(b, j));
  }
  return k;
}

SymMatrix gram(const KernelSpec& spec, const Matrix& points) {
  spec.validate();
  if (points.rows() < 1) throw DomainError("gram needs at least one point");
  if (points.cols() != spec.input_dim()) {
    throw DimensionMismatch("points do not match the kernel input dimension");
  }
  for (Index i = 0; i < points.rows(); ++i) {
    if (!spec.contains(row_vector(points, i))) throw DomainError("point outside the kernel domain");
  }
  const Matrix k = cross_kernel(spec, points, points);
  return SymMatrix::symmetrized(k / static_cast<double>(points.rows()));
}

SampleSet draw_sample(const KernelSpec& spec, Index n, std::uint64_t seed, std::uint64_t trial) {
  spec.validate();
  if (n < 1) throw DomainError("sample size must be positive");
  const Index dim = spec.input_dim();
  Matrix points(n, dim);
  for (Index i = 0; i < n; ++i) {
    CounterStream stream(seed, trial, static_cast<std::uint32_t>(i));
    for (Index k = 0; k < dim; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      points(i, k) = spec.lower[ku] + (spec.upper[ku] - spec.lower[ku]) * stream.uniform();
    }
  }
  SymMatrix g = gram(spec, points);
  return {std::move(points), std::move(g)};
}

std::vector<double> empirical_operator_eigs(const SymMatrix& g) {
  const Vector ev = eigenvalues(g);
  if (ev.size() > 0 && ev(0) < -kPsdTol) throw NotPSD("gram matrix is not positive semidefinite");
  std::vector<double> out(static_cast<std::size_t>(ev.size()));
  for (Index i = 0; i < ev.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::max(0.0, ev(ev.size() - 1 - i));
  }
  return out;
}

Matrix quadrature_nodes(const KernelSpec& spec, Index m) {
  spec.validate();
  if (m < 2) throw DomainError("quadrature size must be >= 2");
  const Index dim = spec.input_dim();
  Index total = 1;
  for (Index k = 0; k < dim; ++k) {
    if (total > kMaxQuadratureNodes / m) throw DomainError("quadrature grid exceeds 8192 nodes");
    total *= m;
  }
  Matrix nodes(total, dim);
  for (Index flat = 0; flat < total; ++flat) {
    Index rest = flat;
    for (Index k = dim; k-- > 0;) {
      const auto ku = static_cast<std::size_t>(k);
      const Index i = rest % m;
      rest /= m;
      const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      nodes(flat, k) = spec.lower[ku] + frac * (spec.upper[ku] - spec.lower[ku]);
    }
  }
  return nodes;
}

SymMatrix reference_operator(const KernelSpec& spec, Index m) {
  const Matrix nodes = quadrature_nodes(spec, m);
  const Matrix k = cross_kernel(spec, nodes, nodes);
  return SymMatrix::symmetrized(k / static_cast<double>(nodes.rows()));
}

JointSpectrum joint_operator_spectrum(const KernelSpec& spec, const Matrix& points,
                                      const Vector& weights, double floor) {
  spec.validate();
  if (points.rows() != weights.size()) throw DimensionMismatch("one weight per point");
  if (points.rows() < 1) throw DomainError("joint system needs at least one point");
  const SymMatrix g = SymMatrix::symmetrized(cross_kernel(spec, points, points));
  const EigPair e = eig_sym(g);
  const Index total = e.values.size();
  const double top = e.values(total - 1);
  JointSpectrum out;
  if (!(top > 0.0)) {
    out.floored = total;
    return out;
  }
  Index first = total;
  while (first > 0 && e.values(first - 1) > floor * top) --first;
  out.rank = total - first;
  out.floored = first;
  out.condition = top / e.values(first);
  const Matrix b = e.vectors.rightCols(out.rank) *
                   e.values.tail(out.rank).cwiseSqrt().asDiagonal();
  const Matrix s = b.transpose() * weights.asDiagonal() * b;
  out.values = eigenvalues(SymMatrix::symmetrized(s));
  return out;
}

DeviationReport operator_deviation_joint(const KernelSpec& spec, const Matrix& points, Index m) {
  const Matrix nodes = quadrature_nodes(spec, m);
  if (points.rows() < 1) throw DomainError("sample must be non-empty");
  for (Index i = 0; i < points.rows(); ++i) {
    if (!spec.contains(row_vector(points, i))) throw DomainError("point outside the kernel domain");
  }
  const Index big_n = nodes.rows();
  const Index n = points.rows();
  Matrix all(big_n + n, spec.input_dim());
  all << nodes, points;
  Vector w(big_n + n);
  w.head(big_n).setConstant(-1.0 / static_cast<double>(big_n));
  w.tail(n).setConstant(1.0 / static_cast<double>(n));
  DeviationReport report;
  report.spectrum = joint_operator_spectrum(spec, all, w);
  report.deviation =
      report.spectrum.values.size() == 0 ? 0.0 : report.spectrum.values.cwiseAbs().maxCoeff();
  return report;
}

NystromBasis::NystromBasis(const KernelSpec& spec, Index m)
    : spec_(spec), nodes_(quadrature_nodes(spec, m)) {
  const Index big_n = nodes_.rows();
  Vector diag(big_n);
  for (Index j = 0; j < big_n; ++j) {
    const Vector z = row_vector(nodes_, j);
    diag(j) = spec_(z, z);
  }
  const double scale = diag.maxCoeff();
  Matrix factor(big_n, 0);
  while (true) {
    Index p = 0;
    const double best = diag.maxCoeff(&p);
    if (!(best > kPivotTol * scale) || factor.cols() == big_n) break;
    const Vector zp = row_vector(nodes_, p);
    Vector col(big_n);
    for (Index j = 0; j < big_n; ++j) col(j) = spec_(row_vector(nodes_, j), zp);
    const Index k = factor.cols();
    if (k > 0) col -= factor * factor.row(p).transpose();
    col /= std::sqrt(best);
    factor.conservativeResize(Eigen::NoChange, k + 1);
    factor.col(k) = col;
    diag -= col.cwiseAbs2();
    diag(p) = 0.0;
    pivots_.push_back(p);
  }
  node_residual_ = std::max(0.0, diag.maxCoeff());

  const auto r = static_cast<Index>(pivots_.size());
  pivot_factor_ = Matrix::Zero(r, r);
  for (Index i = 0; i < r; ++i) {
    pivot_factor_.row(i).head(i + 1) = factor.row(pivots_[static_cast<std::size_t>(i)]).head(i + 1);
  }
  rotation_ = Matrix::Identity(r, r);
  const Matrix psi = features(nodes_);
  const Matrix cov = psi.transpose() * psi / static_cast<double>(big_n);
  const EigPair e = eig_sym(SymMatrix::symmetrized(cov));
  rotation_ = e.vectors.rowwise().reverse();
  mu_ = e.values.reverse().cwiseMax(0.0);
  node_features_ = psi * rotation_;
}

Matrix NystromBasis::features(const Matrix& points) const {
  const Index r = static_cast<Index>(pivots_.size());
  Matrix pivot_points(r, spec_.input_dim());
  for (Index i = 0; i < r; ++i) pivot_points.row(i) = nodes_.row(pivots_[static_cast<std::size_t>(i)]);
  // Columns k_P(x_i); solve L_PP psi = k_P.
  const Matrix kp = cross_kernel(spec_, pivot_points, points);
  const Matrix psi = pivot_factor_.triangularView<Eigen::Lower>().solve(kp);
  return psi.transpose() * rotation_;
}

double NystromBasis::residual(const Matrix& points) const {
  const Matrix f = features(points);
  double worst = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    const Vector x = row_vector(points, i);
    worst = std::max(worst, spec_(x, x) - f.row(i).squaredNorm());
  }
  return worst;
}

SymMatrix NystromBasis::empirical_representation(const Matrix& points) const {
  if (points.rows() < 1) throw DomainError("sample must be non-empty");
  const Matrix f = features(points);
  return SymMatrix::symmetrized(f.transpose() * f / static_cast<double>(points.rows()));
}

SymMatrix NystromBasis::reference_representation() const { return SymMatrix::diagonal(mu_); }

SymMatrix NystromBasis::xi_representation(const Vector& x) const {
  Matrix p(1, x.size());
  p.row(0) = x.transpose();
  const Vector phi = features(p).row(0).transpose();
  return SymMatrix::symmetrized(phi * phi.transpose() - Matrix(mu_.asDiagonal()));
}

SymMatrix NystromBasis::xi_second_moment() const {
  const Index big_n = nodes_.rows();
  Vector kdiag(big_n);
  for (Index j = 0; j < big_n; ++j) {
    const Vector z = row_vector(nodes_, j);
    kdiag(j) = spec_(z, z);
  }
  const Matrix weighted = node_features_.transpose() * kdiag.asDiagonal() * node_features_;
  Matrix second = weighted / static_cast<double>(big_n);
  second.diagonal() -= mu_.cwiseAbs2();
  return SymMatrix::symmetrized(second);
}

double NystromBasis::operator_deviation(const Matrix& points) const {
  return op_norm(empirical_representation(points) - reference_representation());
}

double operator_deviation(const NystromBasis& basis, const SampleSet& sample) {
  return basis.operator_deviation(sample.points);
}

XiParameters xi_parameters(const NystromBasis& basis) {
  XiParameters xi;
  xi.kappa = kernel_sup(basis.spec());
  if (basis.rank() == 0) throw DomainError("reference operator is zero");
  xi.lk_norm = basis.reference_eigenvalues()(0);
  const SymMatrix second = basis.xi_second_moment();
  const double top = lambda_max(second);
  if (!(top > 0.0)) throw DomainError("xi second moment vanishes");
  xi.xi_intdim = intrinsic_dimension(second.trace(), top);
  return xi;
}

XiParameters xi_parameters(const KernelSpec& spec, Index m) {
  return xi_parameters(NystromBasis(spec, m));
}

double xi_refinement_delta(const KernelSpec& spec, Index m) {
  return std::abs(xi_parameters(spec, m).xi_intdim - xi_parameters(spec, 2 * m).xi_intdim);
}

double cor10_threshold(const XiParameters& xi, std::int64_t n) {
  const double nd = static_cast<double>(n);
  return std::max(std::sqrt(xi.kappa * xi.lk_norm / nd), 1.0 / nd);
}

BoundResult cor10_certificate(const XiParameters& xi, std::int64_t n, double t) {
  return kernel_operator_tail(n, xi.kappa, xi.lk_norm, xi.xi_intdim, t);
}

BoundResult cor10_certificate(const KernelSpec& spec, std::int64_t n, double t, Index m) {
  return cor10_certificate(xi_parameters(spec, m), n, t);
}

}  // namespace mbern

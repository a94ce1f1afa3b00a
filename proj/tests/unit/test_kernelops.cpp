#include "mbern/kernelops.hpp"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "mbern/errors.hpp"

namespace mbern {
namespace {

Matrix column(std::initializer_list<double> xs) {
  Matrix m(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

TEST(KernelSpecTest, Validation) {
  EXPECT_THROW(KernelSpec::gaussian(0.0).validate(), InvalidSpec);
  EXPECT_THROW(KernelSpec::polynomial(0, 1.0).validate(), InvalidSpec);
  EXPECT_THROW(KernelSpec::polynomial(2, -1.0).validate(), InvalidSpec);
  EXPECT_THROW(KernelSpec::gaussian(1.0, {1.0}, {0.0}).validate(), InvalidSpec);
  EXPECT_EQ(kernel_family_from_string(to_string(KernelFamily::polynomial)), KernelFamily::polynomial);
}

TEST(KernelSupTest, Values) {
  EXPECT_EQ(kernel_sup(KernelSpec::gaussian(0.3)), 1.0);
  // (x^2 + 1)^2 on [0, 2] peaks at the corner: 25.
  EXPECT_NEAR(kernel_sup(KernelSpec::polynomial(2, 1.0, {0.0}, {2.0})), 25.0, 1e-12);
}

TEST(GramTest, Examples) {
  const KernelSpec k = KernelSpec::gaussian(1.0);
  const SymMatrix g = gram(k, column({0.3, 0.3}));
  EXPECT_NEAR(g(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(g(0, 1), 0.5, 1e-15);
  const auto eig = empirical_operator_eigs(g);
  EXPECT_NEAR(eig[0], 1.0, 1e-15);
  EXPECT_NEAR(eig[1], 0.0, 1e-15);

  EXPECT_EQ(gram(k, column({0.7}))(0, 0), 1.0);

  const KernelSpec narrow = KernelSpec::gaussian(0.01);
  const SymMatrix far = gram(narrow, column({0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_LE((far.entries() - 0.2 * Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-100);

  EXPECT_THROW(gram(k, column({0.5, 1.5})), DomainError);
}

TEST(GramTest, PsdAndTraceBound) {
  const KernelSpec k = KernelSpec::polynomial(3, 0.5);
  const SampleSet s = draw_sample(k, 40, 5, 0);
  EXPECT_GE(lambda_min(s.gram), -1e-10);
  EXPECT_LE(s.gram.trace(), kernel_sup(k) + 1e-12);
}

TEST(EmpiricalEigsTest, ZeroAndTrace) {
  for (double v : empirical_operator_eigs(SymMatrix::zero(3))) EXPECT_EQ(v, 0.0);
  const SampleSet s = draw_sample(KernelSpec::gaussian(0.2), 30, 1, 2);
  const auto eig = empirical_operator_eigs(s.gram);
  double sum = 0.0;
  for (double v : eig) sum += v;
  EXPECT_NEAR(sum, s.gram.trace(), 1e-12);
  EXPECT_TRUE(std::is_sorted(eig.rbegin(), eig.rend()));
  const std::vector<double> neg{-1e-3, 1.0};
  EXPECT_THROW(empirical_operator_eigs(SymMatrix::diagonal(neg)), NotPSD);
}

TEST(ReferenceOperatorTest, Examples) {
  EXPECT_NEAR(reference_operator(KernelSpec::gaussian(0.5), 2048).trace(), 1.0, 1e-6);

  // K(x, y) = x y: one eigenvalue, the midpoint estimate of the integral of x^2.
  const Index m = 1000;
  const auto eig = empirical_operator_eigs(reference_operator(KernelSpec::polynomial(1, 0.0), m));
  EXPECT_NEAR(eig[0], 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(eig[0], 1.0 / 3.0 - 1.0 / (12.0 * m * m), 1e-13);
  EXPECT_LT(eig[1], 1e-12);

  EXPECT_THROW(quadrature_nodes(KernelSpec::gaussian(0.5), 1), DomainError);
  EXPECT_THROW(quadrature_nodes(KernelSpec::gaussian(0.5), 9000), DomainError);
  EXPECT_THROW(quadrature_nodes(KernelSpec::gaussian(0.5, {0, 0}, {1, 1}), 100), DomainError);
}

TEST(ReferenceOperatorTest, RefinementAgreement) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const Vector a = NystromBasis(k, 1000).reference_eigenvalues();
  const Vector b = NystromBasis(k, 2000).reference_eigenvalues();
  for (Index j = 0; j < std::min<Index>(10, std::min(a.size(), b.size())); ++j) {
    EXPECT_NEAR(a(j), b(j), 1e-4);
  }
}

TEST(NystromBasisTest, MatchesReferenceSpectrum) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const NystromBasis basis(k, 400);
  const auto ref = empirical_operator_eigs(reference_operator(k, 400));
  const Vector& mu = basis.reference_eigenvalues();
  for (Index j = 0; j < mu.size(); ++j) EXPECT_NEAR(mu(j), ref[j], 1e-12);
  EXPECT_LE(basis.node_residual(), 1e-10);
}

TEST(NystromBasisTest, GramEigenvalueEquivalence) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const NystromBasis basis(k, 2000);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const SampleSet s = draw_sample(k, 50, 8, trial);
    const auto g = empirical_operator_eigs(s.gram);
    const Vector rep = eigenvalues(basis.empirical_representation(s.points));
    Vector joint_w = Vector::Constant(s.points.rows(), 1.0 / s.points.rows());
    const Vector joint = joint_operator_spectrum(k, s.points, joint_w).values;
    // Both operators are nonzero only on a subspace; compare the leading values.
    for (Index j = 0; j < rep.size() && j < 10; ++j) {
      EXPECT_NEAR(g[j], rep(rep.size() - 1 - j), 1e-8);
      EXPECT_NEAR(g[j], joint(joint.size() - 1 - j), 1e-8);
    }
  }
}

TEST(DeviationTest, NodesAsSampleGiveZero) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const Index m = 200;
  const Matrix nodes = quadrature_nodes(k, m);
  EXPECT_LT(operator_deviation_joint(k, nodes, m).deviation, 1e-8);
  EXPECT_LT(NystromBasis(k, m).operator_deviation(nodes), 1e-8);
}

TEST(DeviationTest, RoutesAgree) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const Index m = 300;
  const NystromBasis basis(k, m);
  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    const SampleSet s = draw_sample(k, 40, 12, trial);
    EXPECT_NEAR(operator_deviation_joint(k, s.points, m).deviation,
                operator_deviation(basis, s), 1e-9);
  }
}

TEST(DeviationTest, DominatesEigenvalueGaps) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const NystromBasis basis(k, 2000);
  const Vector& mu = basis.reference_eigenvalues();
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    const SampleSet s = draw_sample(k, 60, 4, trial);
    const auto emp = empirical_operator_eigs(s.gram);
    double gap = 0.0;
    for (Index j = 0; j < 10; ++j) {
      const double ref = j < mu.size() ? mu(j) : 0.0;
      gap = std::max(gap, std::abs(ref - emp[static_cast<std::size_t>(j)]));
    }
    EXPECT_GE(basis.operator_deviation(s.points), gap - 1e-6);
  }
}

TEST(DeviationTest, ShrinksWithSampleSize) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const NystromBasis basis(k, 4000);
  const double small = basis.operator_deviation(draw_sample(k, 100, 6, 0).points);
  const double large = basis.operator_deviation(draw_sample(k, 4000, 6, 0).points);
  EXPECT_LT(large, small);
}

TEST(XiParametersTest, Gaussian) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const NystromBasis basis(k, 2000);
  const XiParameters xi = xi_parameters(basis);
  EXPECT_EQ(xi.kappa, 1.0);
  EXPECT_LE(xi.lk_norm, basis.reference_eigenvalues().sum() + 1e-12);
  EXPECT_GE(xi.xi_intdim, 1.0);
  EXPECT_LT(xi_refinement_delta(k, 1000), 1e-4);
}

TEST(XiParametersTest, SampledXiNormAtMostTwoKappa) {
  const KernelSpec k = KernelSpec::gaussian(0.3);
  const NystromBasis basis(k, 1000);
  const double kappa = xi_parameters(basis).kappa;
  const SampleSet s = draw_sample(k, 200, 3, 0);
  for (Index i = 0; i < s.points.rows(); ++i) {
    EXPECT_LE(op_norm(basis.xi_representation(s.points.row(i).transpose())), 2.0 * kappa + 1e-8);
  }
}

TEST(XiParametersTest, SecondMomentMatchesSampleAverage) {
  const KernelSpec k = KernelSpec::polynomial(2, 1.0);
  const NystromBasis basis(k, 500);
  const SymMatrix exact = basis.xi_second_moment();
  const Matrix nodes = quadrature_nodes(k, 500);
  Matrix avg = Matrix::Zero(exact.dim(), exact.dim());
  for (Index i = 0; i < nodes.rows(); ++i) {
    avg += basis.xi_representation(nodes.row(i).transpose()).squared().entries();
  }
  avg /= static_cast<double>(nodes.rows());
  EXPECT_LE((avg - exact.entries()).norm(), 1e-10);
}

TEST(Cor10Test, Examples) {
  const XiParameters xi{1.0, 0.5, 4.0};
  const BoundResult b = cor10_certificate(xi, 100, 0.3);
  EXPECT_NEAR(b.raw, 100.0 * std::exp(-9.0 / 1.4), 1e-12);
  EXPECT_NEAR(b.raw, 0.161477, 1e-5);
  EXPECT_TRUE(b.valid);
  EXPECT_NEAR(cor10_threshold(xi, 100), std::sqrt(0.005), 1e-15);
  EXPECT_FALSE(cor10_certificate(xi, 100, cor10_threshold(xi, 100) * (1 - 1e-9)).valid);
  EXPECT_TRUE(cor10_certificate(xi, 100, cor10_threshold(xi, 100)).valid);
  EXPECT_EQ(cor10_certificate(xi, 100, 1e4).raw, 0.0);
  EXPECT_EQ(cor10_certificate(KernelSpec::gaussian(0.5), 100, 1e4, 200).raw, 0.0);
}

}  // namespace
}  // namespace mbern

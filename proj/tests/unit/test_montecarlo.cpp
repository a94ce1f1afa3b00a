#include "mbern/montecarlo.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "mbern/errors.hpp"

namespace mbern {
namespace {

SymMatrix scalar(double v) { return SymMatrix::identity(1) * v; }

EnsembleSpec pm1(Index n) {
  return EnsembleSpec::finite_support({{scalar(1.0), 0.5}, {scalar(-1.0), 0.5}}, n);
}

BoundFn constant_bound(double v) {
  return [v](double) { return BoundResult::make(v, Regime::bounded); };
}

TEST(TGridTest, Validation) {
  EXPECT_THROW(validate_t_grid(std::vector<double>{}), DomainError);
  EXPECT_THROW(validate_t_grid(std::vector<double>{0.0, 1.0}), DomainError);
  EXPECT_THROW(validate_t_grid(std::vector<double>{1.0, 1.0}), DomainError);
  EXPECT_THROW(validate_t_grid(std::vector<double>{2.0, 1.0}), DomainError);
  EXPECT_THROW(validate_t_grid(std::vector<double>{1.0, INFINITY}), DomainError);
  EXPECT_NO_THROW(validate_t_grid(std::vector<double>{0.1, 1.0, 3.0}));
}

TEST(EstimateTailTest, MatchesEnumeration) {
  SimConfig cfg{pm1(4), {2.0}, 1000000, 1};
  const auto est = estimate_tail(cfg);
  ASSERT_EQ(est.size(), 1u);
  EXPECT_LE(est[0].ci_low, 0.125);
  EXPECT_GE(est[0].ci_high, 0.125);
  EXPECT_EQ(est[0].trials, 1000000u);
  EXPECT_DOUBLE_EQ(est[0].p_hat, static_cast<double>(est[0].hits) / est[0].trials);
}

TEST(EstimateTailTest, BeyondSupportHasNoHits) {
  SimConfig cfg{pm1(5), {5.0, 5.5, 7.0}, 20000, 3};
  for (const auto& e : estimate_tail(cfg)) EXPECT_EQ(e.hits, 0u);
}

TEST(EstimateTailTest, ZeroTrialsRejected) {
  SimConfig cfg{pm1(4), {1.0}, 0, 1};
  EXPECT_THROW(estimate_tail(cfg), DomainError);
}

TEST(EstimateTailTest, Invariants) {
  SimConfig cfg{EnsembleSpec::rank_one_sphere(3, 10), {0.2, 0.5, 1.0, 1.5, 2.0, 3.0}, 5000, 9};
  const auto est = estimate_tail(cfg);
  for (std::size_t i = 0; i < est.size(); ++i) {
    EXPECT_LE(0.0, est[i].ci_low);
    EXPECT_LE(est[i].ci_low, est[i].p_hat);
    EXPECT_LE(est[i].p_hat, est[i].ci_high);
    EXPECT_LE(est[i].ci_high, 1.0);
    if (i > 0) EXPECT_LE(est[i].hits, est[i - 1].hits);
  }
}

TEST(EstimateTailTest, IndependentOfThreadCount) {
  SimConfig cfg{EnsembleSpec::subexp_scaled(SymMatrix::identity(3) * 0.5, 8),
                {0.5, 1.0, 2.0, 4.0, 8.0}, 4000, 21};
  const auto one = estimate_tail(cfg, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto many = estimate_tail(cfg, threads);
    for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].hits, many[i].hits);
  }
}

TEST(EstimateTailTest, AgreesWithExactOracleAcrossSeeds) {
  const EnsembleSpec spec = pm1(6);
  const std::vector<double> grid{0.5, 1.5, 2.5, 3.5, 4.5};
  const auto exact = exact_tail(spec, grid);
  constexpr std::uint64_t kTrials = 10000;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto est = estimate_tail(SimConfig{spec, grid, kTrials, seed});
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double p = exact[i];
      const double tol = 4.0 * std::sqrt(p * (1 - p) / kTrials) + 10.0 / kTrials;
      ok = ok && std::abs(est[i].p_hat - p) <= tol;
    }
    within += ok;
  }
  EXPECT_GE(within, 50);
}

TEST(JointMartingaleTest, LargeSigmaMatchesPlainTail) {
  const std::vector<double> d{1.0, 0.5};
  const EnsembleSpec spec = EnsembleSpec::martingale_adapted(SymMatrix::diagonal(d), 16);
  SimConfig cfg{spec, {0.5, 1.0, 2.0, 3.0}, 5000, 4};
  const auto joint = estimate_joint_tail_martingale(cfg, 16.0);
  const auto plain = estimate_tail(cfg);
  for (std::size_t i = 0; i < joint.size(); ++i) EXPECT_EQ(joint[i].hits, plain[i].hits);
}

TEST(JointMartingaleTest, ZeroSigmaAndZeroDirection) {
  const EnsembleSpec spec = EnsembleSpec::martingale_adapted(SymMatrix::identity(2), 8);
  SimConfig cfg{spec, {0.1, 1.0}, 2000, 4};
  for (const auto& e : estimate_joint_tail_martingale(cfg, 0.0)) EXPECT_EQ(e.hits, 0u);
  SimConfig zero{EnsembleSpec::martingale_adapted(SymMatrix::zero(2), 8), {0.1, 1.0}, 2000, 4};
  for (const auto& e : estimate_joint_tail_martingale(zero, 1.0)) EXPECT_EQ(e.hits, 0u);
  EXPECT_THROW(estimate_joint_tail_martingale(SimConfig{pm1(3), {1.0}, 10, 1}, 1.0), InvalidSpec);
}

TEST(VectorTailTest, NormsBoundedByLength) {
  const auto est = estimate_vector_tail(SphereVectorSpec{3, 5}, std::vector<double>{1.0, 5.0}, 2000,
                                        2, 0.99, 2);
  EXPECT_GT(est[0].hits, 0u);
  EXPECT_EQ(est[1].hits, 0u);
}

TEST(MeanNormTest, Examples) {
  EXPECT_DOUBLE_EQ(exact_mean_norm(pm1(4)), 1.5);
  const MeanEstimate est = estimate_mean_norm(pm1(4), 20000, 5);
  EXPECT_LE(std::abs(est.mean - 1.5), 3.0 * est.standard_error);

  const MeanEstimate zero =
      estimate_mean_norm(EnsembleSpec::rademacher({SymMatrix::zero(2), SymMatrix::zero(2)}), 100, 1);
  EXPECT_EQ(zero.mean, 0.0);
  EXPECT_EQ(zero.standard_error, 0.0);
}

TEST(MeanNormTest, BelowIntegratedBound) {
  const EnsembleSpec spec = EnsembleSpec::rank_one_sphere(4, 16);
  const EnsembleParams p = ensemble_params(spec);
  BoundRequest req{spec.length(), spec.dim(), p.sigma2, p.U, p.trace_var, 1.0};
  const double integral = expectation_bound_by_integration(
      [&](double t) {
        if (t <= 0.0) return 1.0;
        BoundRequest r = req;
        r.t = t;
        return bernstein_bounded_tail(r).clipped;
      },
      40.0, 4000);
  EXPECT_LE(estimate_mean_norm(spec, 5000, 3).mean, integral);
}

TEST(DominanceTest, Examples) {
  SimConfig cfg{pm1(6), {0.5, 2.0, 4.0}, 3000, 1};
  const auto est = estimate_tail(cfg);
  EXPECT_TRUE(certify_dominance(est, constant_bound(1.0)).pass);

  TailEstimate fake{1.0, 100, 100, 1.0, 1.0, 1.0};
  const DominanceReport bad = certify_dominance(std::vector<TailEstimate>{fake}, constant_bound(0.5));
  EXPECT_FALSE(bad.pass);
  EXPECT_FALSE(bad.rows[0].dominated);
}

TEST(DominanceTest, ExactPlusMinusOne) {
  const EnsembleSpec spec = pm1(4);
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.2 * i);
  const auto p = exact_tail(spec, grid);
  const EnsembleParams params = ensemble_params(spec);
  const DominanceReport rep = certify_dominance_exact(grid, p, [&](double t) {
    return bernstein_bounded_tail(BoundRequest{4, 1, params.sigma2, params.U, params.trace_var, t});
  });
  EXPECT_TRUE(rep.pass);
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.exact_p.has_value());
    EXPECT_LE(*row.exact_p, row.bound.clipped);
  }
}

}  // namespace
}  // namespace mbern

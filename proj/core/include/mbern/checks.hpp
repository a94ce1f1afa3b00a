#pragma once

// Numerical property checks for the inequalities the tail bounds rest on.
// Each check evaluates both sides on a grid, on random draws, or by exact
// enumeration and reports the smallest slack (rhs - lhs + tolerance).

#include <cstdint>
#include <string>
#include <vector>

#include "mbern/spectral.hpp"

namespace mbern::checks {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::uint64_t cases = 0;
  double worst_margin = 0.0;  // min over cases of slack; negative means failure

  void record(double slack);
};

// (1+y)log(1+y) - y >= (y^2/2)/(1+y/3) on a log-grid of (1e-6, 1e4].
CheckResult entropy_lower_bound(int points = 2000);
// e^y / phi(y) <= 1 + 6/y^2 on the same grid, as y^2 e^y <= (y^2 + 6) phi(y).
CheckResult exp_ratio_bound(int points = 2000);
// theta* minimizes phi(theta) sigma2 - theta t (perturbation by 1e-4 theta*).
CheckResult theta_star_optimality(int draws = 1000, std::uint64_t seed = 1);
// phi(theta*) sigma2 - theta* t <= -psi(sigma2, t).
CheckResult theta_star_chain(int draws = 1000, std::uint64_t seed = 1);

// log E e^{theta X} <= phi(theta) E X^2 on random mean-zero finite-support laws.
CheckResult moment_domination(int specs = 200, std::uint64_t seed = 1);
// Midpoint concavity of A -> tr exp(H + log A).
CheckResult lieb_midpoint(int draws = 1000, std::uint64_t seed = 1);
// sum_i f(<u_i, A u_i>) <= tr f(A) for f in {exp, x^2}.
CheckResult peierls(int draws = 1000, std::uint64_t seed = 1);
// E tr phi(theta S_n) <= tr(exp(sum_i log E e^{theta X_i}) - I), exact enumeration.
CheckResult lieb_iteration(int specs = 40, std::uint64_t seed = 1);
// tr(exp(phi(theta) E S^2) - I) <= (tr E S^2 / sigma2) exp(phi(theta) sigma2).
CheckResult variance_wrap(int specs = 40, std::uint64_t seed = 1);
// E tr exp(theta S_k - phi(theta) W_k) <= d for every k, by path enumeration.
CheckResult supermartingale(int specs = 20, std::uint64_t seed = 1);
// Truncated moment generating bound for scalar symmetrized exponentials.
CheckResult truncated_mgf(std::uint64_t seed = 1);

// ||L(Y)|| = ||Y||_2 and L(Y)^2 = diag(||Y||^2, Y Y^T), tolerance 1e-12.
CheckResult dilation_norm(int vectors = 10000, std::uint64_t seed = 1);
CheckResult dilation_square(int vectors = 10000, std::uint64_t seed = 1);
// Vector l2 bound equals the bounded-summand bound at doubled trace.
CheckResult dilation_bound_identity(int draws = 1000, std::uint64_t seed = 1);
// P A^2 P >= (P A P)^2.
CheckResult projection_domination(int draws = 500, std::uint64_t seed = 1);

// v_factor <= 44 for sigma >= 1, t >= sigma.
CheckResult v_factor_cap(int draws = 10000, std::uint64_t seed = 1);
// r_factor and v_factor strictly decrease and psi strictly increases along t.
CheckResult factor_monotonicity(int draws = 200, std::uint64_t seed = 1);
// Both sub-exponential branches agree at the crossover to relative 1e-12.
CheckResult branch_continuity(int draws = 100, std::uint64_t seed = 1);

// Every check above with default sizes.
std::vector<CheckResult> run_all(std::uint64_t seed = 1);

// Truncation of a fixed operator ensemble to its leading coordinates.
struct ProjectionStudy {
  std::vector<Index> j;
  std::vector<double> residual_norm;  // || S - P_j S P_j ||
  std::vector<double> intdim;         // intrinsic dimension of sum (P_j B_i P_j)^2
  double full_intdim = 0.0;
  bool monotone = false;
  bool converged = false;
};
ProjectionStudy projection_convergence(Index d = 256, Index n = 8, std::uint64_t seed = 1,
                                       std::vector<Index> levels = {4, 16, 64, 256});

// Growth of tr p(-(t/sigma2) E W) for eigenvalues sigma2 / i^p.
struct TruncationGrowth {
  std::vector<double> t;
  std::vector<double> truncated_trace;
  double slope = 0.0;  // least squares in log-log coordinates
  double cap = 0.0;    // dimension
};
TruncationGrowth truncation_trace_growth(Index d = 64, double p = 2.0, int points = 41);

}  // namespace mbern::checks

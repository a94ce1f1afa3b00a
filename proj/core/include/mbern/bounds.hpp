#pragma once

// Closed-form tail bounds for sums of random self-adjoint matrices and the
// scalar helpers they are assembled from.
//
// All bounds assume the summands are normalized so that ||X_i|| <= 1. Bounds
// taking a norm scale U apply the normalized formula to X_i / U, i.e. they
// substitute sigma^2 / U^2 and t / U.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "mbern/spectral.hpp"

namespace mbern {

enum class Regime {
  bounded,
  subgaussian,
  subexponential,
  martingale,
  vector_l2,
  vector_linf,
  kernel,
};

std::string_view to_string(Regime r);
// Throws InvalidRequest for unknown names.
Regime regime_from_string(std::string_view name);

struct BoundRequest {
  std::int64_t n = 1;      // number of summands
  std::int64_t d = 1;      // matrix dimension
  double sigma2 = 1.0;     // >= || sum E X_i^2 ||
  double U = 1.0;          // a.s. norm bound, or 2 max psi_1 norm for sub-exponential summands
  double trace_var = 1.0;  // tr sum E X_i^2
  double t = 1.0;          // threshold

  // Throws InvalidRequest (or DomainError for t <= 0).
  void validate() const;
};

struct BoundResult {
  double raw = 0.0;
  double clipped = 0.0;  // min(1, raw)
  Regime regime = Regime::bounded;
  bool valid = true;
  std::string reason;

  static BoundResult make(double raw, Regime regime, bool valid = true, std::string reason = {});
};

// (t^2 / 2) / (sigma2 + t / 3).
double psi(double sigma2, double t);
// e^theta - theta - 1, accurate near zero.
double phi(double theta);
// e^t - 1 + min(-t, 1).
double g(double t);
// log(1 + t / sigma2); 0 at t = 0.
double theta_star(double sigma2, double t);
// 1 + 6 / (t^2 log^2(1 + t / sigma2)). DomainError at t <= 0.
double r_factor(double sigma2, double t);
// 1 + 6 / psi(sigma2, t)^2. DomainError at t <= 0.
double v_factor(double sigma2, double t);
// trace_var / sigma2, clamped below at 1.
double intrinsic_dimension(double trace_var, double sigma2);
// log(16 sqrt(2) d) + log(n U^2 / sigma2). Requires n U^2 >= sigma2.
double k_factor(double sigma2, std::int64_t d, std::int64_t n, double U);

// Bounded summands: 2 (trace_var / sigma2) exp(-psi) r.
BoundResult bernstein_bounded_tail(const BoundRequest& req);

// Both pieces of the sub-exponential bound evaluated at req.t, plus the
// crossover point. Used by the piecewise bound and by continuity checks.
struct SubexpBranches {
  double k = 0.0;
  double threshold = 0.0;
  double subgaussian = 0.0;
  double subexponential = 0.0;
};
SubexpBranches subexp_branches(const BoundRequest& req);

// Sub-exponential summands (U >= 2 max psi_1 norm of ||X_i||). Regime tag is
// subgaussian at or below the threshold and subexponential above it.
BoundResult bernstein_subexp_tail(const BoundRequest& req);

// Martingale differences with predictable variation W_n; bounds
// P(||S_n|| > t, lambda_max(W_n) <= sigma2) using E W_n.
BoundResult martingale_tail(const SymMatrix& expected_w, double sigma2, double t, double U);

// ||sum Y_i||_2 for independent mean-zero vectors with ||Y_i||_2 <= U and
// sigma2 = sum E ||Y_i||^2.
BoundResult vector_bernstein_l2(double sigma2, double t, double U);

// ||sum Y_i||_inf for ||Y_i||_inf <= 1, sigma2 = max coordinate variance.
BoundResult vector_bernstein_linf(double trace_sum_q, double sigma2, double t);

// Empirical integral operator deviation. valid is false below
// max(sqrt(kappa ||L_K|| / n), 1 / n); the value is still computed.
BoundResult kernel_operator_tail(std::int64_t n, double kappa, double lk_norm, double xi_intdim,
                                 double t);

// Composite trapezoid value of the integral of min(1, tail(t)) over [0, t_max].
// The integrand at t = 0 is taken as 1 (tail bounds are usually singular there).
double expectation_bound_by_integration(const std::function<double(double)>& tail, double t_max,
                                        int steps);

// Reference bounds used for side-by-side comparisons.
//
// 2 d exp(-psi) on normalized parameters: the dimension-factor bound.
double classical_baseline(std::int64_t d, double sigma2, double t, double U);
// Intrinsic-dimension bound with the polynomial factor tau / (e^tau - tau - 1),
// where tau solves sqrt(2 sigma2 tau) + U tau / 3 = t. Two-sided.
double intdim_poly_baseline(double intdim, double sigma2, double t, double U);

}  // namespace mbern

#include "mbern/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "mbern/errors.hpp"

namespace mbern {

namespace {

constexpr std::array<std::pair<Regime, std::string_view>, 7> kRegimeNames{{
    {Regime::bounded, "bounded"},
    {Regime::subgaussian, "subgaussian"},
    {Regime::subexponential, "subexponential"},
    {Regime::martingale, "martingale"},
    {Regime::vector_l2, "vector_l2"},
    {Regime::vector_linf, "vector_linf"},
    {Regime::kernel, "kernel"},
}};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidRequest(std::string(what) + " must be positive and finite");
  }
}

void require_threshold(double t) {
  if (!(t > 0.0)) throw DomainError("threshold t must be positive");
}

}  // namespace

std::string_view to_string(Regime r) {
  for (const auto& [regime, name] : kRegimeNames) {
    if (regime == r) return name;
  }
  return "unknown";
}

Regime regime_from_string(std::string_view name) {
  for (const auto& [regime, n] : kRegimeNames) {
    if (n == name) return regime;
  }
  throw InvalidRequest("unknown regime '" + std::string(name) + "'");
}

void BoundRequest::validate() const {
  if (n < 1) throw InvalidRequest("n must be >= 1");
  if (d < 1) throw InvalidRequest("d must be >= 1");
  require_positive(sigma2, "sigma2");
  require_positive(U, "U");
  require_positive(trace_var, "trace_var");
  require_threshold(t);
  if (trace_var < sigma2 * (1.0 - 1e-9)) {
    throw InvalidRequest("trace_var must be >= sigma2");
  }
  if (trace_var / sigma2 > static_cast<double>(d) + 1e-9) {
    throw InvalidRequest("trace_var / sigma2 exceeds the dimension d");
  }
}

BoundResult BoundResult::make(double raw, Regime regime, bool valid, std::string reason) {
  BoundResult r;
  r.raw = raw;
  r.clipped = std::min(1.0, raw);
  r.regime = regime;
  r.valid = valid;
  r.reason = std::move(reason);
  return r;
}

double psi(double sigma2, double t) { return (t * t / 2.0) / (sigma2 + t / 3.0); }

double phi(double theta) {
  if (std::abs(theta) < 1e-3) {
    // Taylor series to theta^6; truncation error below 1e-22.
    const double t2 = theta * theta;
    return t2 * (0.5 + theta * (1.0 / 6.0 + theta * (1.0 / 24.0 + theta * (1.0 / 120.0 +
                                                                            theta / 720.0))));
  }
  return std::expm1(theta) - theta;
}

// Below -1 the truncation is 1 and g is e^t exactly; elsewhere it is phi.
double g(double t) { return t <= -1.0 ? std::exp(t) : phi(t); }

double theta_star(double sigma2, double t) {
  if (t == 0.0) return 0.0;
  return std::log1p(t / sigma2);
}

double r_factor(double sigma2, double t) {
  require_threshold(t);
  const double l = std::log1p(t / sigma2);
  return 1.0 + 6.0 / (t * t * l * l);
}

double v_factor(double sigma2, double t) {
  require_threshold(t);
  const double p = psi(sigma2, t);
  return 1.0 + 6.0 / (p * p);
}

double intrinsic_dimension(double trace_var, double sigma2) {
  require_positive(sigma2, "sigma2");
  if (trace_var < sigma2 * (1.0 - 1e-9)) throw InvalidRequest("trace_var must be >= sigma2");
  return std::max(1.0, trace_var / sigma2);
}

double k_factor(double sigma2, std::int64_t d, std::int64_t n, double U) {
  if (d < 1 || n < 1 || !(sigma2 > 0.0) || !(U > 0.0)) {
    throw DomainError("k_factor needs positive sigma2, d, n, U");
  }
  const double ratio = static_cast<double>(n) * U * U / sigma2;
  if (ratio < 1.0) throw DomainError("k_factor needs n U^2 >= sigma2");
  return std::log(16.0 * std::numbers::sqrt2 * static_cast<double>(d)) + std::log(ratio);
}

BoundResult bernstein_bounded_tail(const BoundRequest& req) {
  req.validate();
  const double s2 = req.sigma2 / (req.U * req.U);
  const double tau = req.t / req.U;
  const double ratio = req.trace_var / req.sigma2;
  const double raw = 2.0 * ratio * std::exp(-psi(s2, tau)) * r_factor(s2, tau);
  return BoundResult::make(raw, Regime::bounded);
}

SubexpBranches subexp_branches(const BoundRequest& req) {
  req.validate();
  SubexpBranches b;
  const double dd = static_cast<double>(req.d);
  const double inflate = 1.0 + 1.0 / dd;
  b.k = k_factor(req.sigma2, req.d, req.n, req.U);
  b.threshold = req.sigma2 * inflate / (2.0 * req.U * b.k);
  const double lead = 4.0 * (req.trace_var / req.sigma2) * r_factor(req.sigma2, req.t);
  b.subgaussian = lead * std::exp(-req.t * req.t / (2.0 * req.sigma2 * inflate));
  b.subexponential = lead * std::exp(-req.t / (4.0 * req.U * b.k));
  return b;
}

BoundResult bernstein_subexp_tail(const BoundRequest& req) {
  const SubexpBranches b = subexp_branches(req);
  if (req.t <= b.threshold) return BoundResult::make(b.subgaussian, Regime::subgaussian);
  return BoundResult::make(b.subexponential, Regime::subexponential);
}

BoundResult martingale_tail(const SymMatrix& expected_w, double sigma2, double t, double U) {
  require_positive(sigma2, "sigma2");
  require_positive(U, "U");
  require_threshold(t);
  const double s2 = sigma2 / (U * U);
  const double tau = t / U;
  const SymMatrix scaled = expected_w * ((tau / s2) / (U * U));
  const double truncated = trace_unit_truncation(scaled);
  const double raw = 2.0 * truncated * std::exp(-psi(s2, tau)) * v_factor(s2, tau);
  return BoundResult::make(raw, Regime::martingale);
}

BoundResult vector_bernstein_l2(double sigma2, double t, double U) {
  require_positive(sigma2, "sigma2");
  require_positive(U, "U");
  require_threshold(t);
  const double s2 = sigma2 / (U * U);
  const double tau = t / U;
  const double raw = 4.0 * std::exp(-psi(s2, tau)) * r_factor(s2, tau);
  return BoundResult::make(raw, Regime::vector_l2);
}

BoundResult vector_bernstein_linf(double trace_sum_q, double sigma2, double t) {
  require_positive(trace_sum_q, "trace_sum_q");
  require_positive(sigma2, "sigma2");
  require_threshold(t);
  const double ratio = trace_sum_q / sigma2;
  const double raw = 2.0 * ratio * std::exp(-psi(sigma2, t)) * r_factor(sigma2, t);
  return BoundResult::make(raw, Regime::vector_linf);
}

BoundResult kernel_operator_tail(std::int64_t n, double kappa, double lk_norm, double xi_intdim,
                                 double t) {
  if (n < 1) throw InvalidRequest("n must be >= 1");
  require_positive(kappa, "kappa");
  require_positive(lk_norm, "lk_norm");
  require_threshold(t);
  if (!(xi_intdim >= 1.0 - 1e-12)) throw InvalidRequest("xi_intdim must be >= 1");
  const double nd = static_cast<double>(n);
  const double exponent = nd * t * t / (2.0 * kappa * (lk_norm + 2.0 * t / 3.0));
  const double raw = 25.0 * xi_intdim * std::exp(-exponent);
  const double lower = std::max(std::sqrt(kappa * lk_norm / nd), 1.0 / nd);
  if (t < lower) {
    return BoundResult::make(raw, Regime::kernel, false,
                             "t below validity threshold " + std::to_string(lower));
  }
  return BoundResult::make(raw, Regime::kernel);
}

double expectation_bound_by_integration(const std::function<double(double)>& tail, double t_max,
                                        int steps) {
  if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
  if (steps < 1) throw DomainError("steps must be positive");
  const double h = t_max / steps;
  double sum = 0.5 * 1.0;
  for (int i = 1; i < steps; ++i) sum += std::min(1.0, tail(h * i));
  sum += 0.5 * std::min(1.0, tail(t_max));
  return sum * h;
}

double classical_baseline(std::int64_t d, double sigma2, double t, double U) {
  require_positive(sigma2, "sigma2");
  require_positive(U, "U");
  require_threshold(t);
  return 2.0 * static_cast<double>(d) * std::exp(-psi(sigma2 / (U * U), t / U));
}

double intdim_poly_baseline(double intdim, double sigma2, double t, double U) {
  require_positive(sigma2, "sigma2");
  require_positive(U, "U");
  require_threshold(t);
  // Solve (U/3) s^2 + sqrt(2 sigma2) s - t = 0 for s = sqrt(tau) > 0.
  const double a = U / 3.0;
  const double b = std::sqrt(2.0 * sigma2);
  const double s = 2.0 * t / (b + std::sqrt(b * b + 4.0 * a * t));
  const double tau = s * s;
  return 2.0 * intdim * tau / phi(tau);
}

}  // namespace mbern

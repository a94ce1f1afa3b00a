#include "mbern/checks.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "mbern/bounds.hpp"
#include "mbern/ensembles.hpp"
#include "mbern/rng.hpp"

namespace mbern::checks {

namespace {

// Stream tags keep the draws of different checks independent.
enum Tag : std::uint32_t {
  kTagTheta = 1,
  kTagMoment,
  kTagLieb,
  kTagPeierls,
  kTagIteration,
  kTagWrap,
  kTagMartingale,
  kTagDilation,
  kTagProjection,
  kTagVCap,
  kTagMonotone,
  kTagBranch,
  kTagStudy,
  kTagIdentity,
};

double log_uniform(CounterStream& s, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * s.uniform());
}

Index pick(CounterStream& s, Index lo, Index hi) {
  return lo + static_cast<Index>(s.uniform() * static_cast<double>(hi - lo + 1));
}

SymMatrix random_symmetric(CounterStream& s, Index d) {
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      m(i, j) = 2.0 * s.uniform() - 1.0;
      m(j, i) = m(i, j);
    }
  }
  return SymMatrix(m);
}

Matrix random_orthogonal(CounterStream& s, Index d) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) g(i, j) = s.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, d);
}

// Eigenvalues uniform in [lo, hi] with a random eigenbasis.
SymMatrix random_positive(CounterStream& s, Index d, double lo, double hi) {
  const Matrix q = random_orthogonal(s, d);
  Vector lambda(d);
  for (Index i = 0; i < d; ++i) lambda(i) = lo + (hi - lo) * s.uniform();
  return SymMatrix::symmetrized(q * lambda.asDiagonal() * q.transpose());
}

// Mean-zero atoms with norms at most 1.
EnsembleSpec random_finite_support(CounterStream& s, Index d, Index atoms, Index n) {
  std::vector<double> p(static_cast<std::size_t>(atoms));
  double total = 0.0;
  for (auto& v : p) {
    v = 0.1 + s.uniform();
    total += v;
  }
  for (auto& v : p) v /= total;
  std::vector<Matrix> a;
  Matrix mean = Matrix::Zero(d, d);
  for (Index k = 0; k + 1 < atoms; ++k) {
    a.push_back(random_symmetric(s, d).entries());
    mean += p[static_cast<std::size_t>(k)] * a.back();
  }
  a.push_back(-mean / p.back());
  double biggest = 0.0;
  for (const auto& m : a) biggest = std::max(biggest, op_norm(SymMatrix::symmetrized(m)));
  std::vector<Atom> list;
  for (Index k = 0; k < atoms; ++k) {
    const Matrix scaled = a[static_cast<std::size_t>(k)] / std::max(biggest, 1e-300);
    list.push_back({SymMatrix::symmetrized(scaled), p[static_cast<std::size_t>(k)]});
  }
  return EnsembleSpec::finite_support(std::move(list), n);
}

double trace_of(const SymMatrix& a, double (*f)(double)) {
  const Vector ev = eigenvalues(a);
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) s += f(ev(i));
  return s;
}

double exp_fn(double x) { return std::exp(x); }
double square_fn(double x) { return x * x; }
double phi_fn(double x) { return phi(x); }

}  // namespace

void CheckResult::record(double slack) {
  if (cases == 0 || slack < worst_margin) worst_margin = slack;
  ++cases;
  if (!(slack >= 0.0)) passed = false;
}

CheckResult entropy_lower_bound(int points) {
  CheckResult r{"entropy_lower_bound"};
  for (int k = 1; k <= points; ++k) {
    const double y = std::pow(10.0, -6.0 + 10.0 * k / points);
    const double lhs = (1.0 + y) * std::log1p(y) - y;
    const double rhs = (y * y / 2.0) / (1.0 + y / 3.0);
    r.record(lhs - rhs + 1e-12 * (1.0 + y * y));
  }
  return r;
}

CheckResult exp_ratio_bound(int points) {
  CheckResult r{"exp_ratio_bound"};
  for (int k = 1; k <= points; ++k) {
    const double y = std::pow(10.0, -6.0 + 10.0 * k / points);
    // phi(y) e^{-y}, without overflow for large y.
    const double damped = y < 1.0 ? phi(y) * std::exp(-y) : -std::expm1(-y) - y * std::exp(-y);
    const double lhs = y * y;
    const double rhs = (y * y + 6.0) * damped;
    r.record((rhs - lhs) / (y * y + 6.0) + 1e-12);
  }
  return r;
}

CheckResult theta_star_optimality(int draws, std::uint64_t seed) {
  CheckResult r{"theta_star_optimality"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagTheta);
    const double sigma2 = log_uniform(s, 1e-2, 1e2);
    const double t = log_uniform(s, 1e-2, 1e2);
    const auto f = [&](double theta) { return phi(theta) * sigma2 - theta * t; };
    const double th = theta_star(sigma2, t);
    const double delta = 1e-4 * th;
    const double tol = 1e-12 * (1.0 + std::abs(f(th)));
    r.record(std::min(f(th + delta), f(th - delta)) - f(th) + tol);
  }
  return r;
}

CheckResult theta_star_chain(int draws, std::uint64_t seed) {
  CheckResult r{"theta_star_chain"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagTheta + 100);
    const double sigma2 = log_uniform(s, 1e-2, 1e2);
    const double t = log_uniform(s, 1e-2, 1e2);
    const double th = theta_star(sigma2, t);
    const double lhs = phi(th) * sigma2 - th * t;
    const double rhs = -psi(sigma2, t);
    r.record(rhs - lhs + 1e-12 * (1.0 + std::abs(rhs)));
  }
  return r;
}

CheckResult moment_domination(int specs, std::uint64_t seed) {
  CheckResult r{"moment_domination"};
  constexpr double kThetas[] = {0.1, 0.5, 1.0, 2.0};
  for (int k = 0; k < specs; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagMoment);
    const Index d = pick(s, 1, 3);
    const Index atoms = pick(s, 2, 4);
    const EnsembleSpec spec = random_finite_support(s, d, atoms, 1);
    const SymMatrix second = exact_variance(spec);
    for (double theta : kThetas) {
      const SymMatrix lhs = matrix_log(exact_mgf(spec, theta));
      r.record(lambda_min(second * phi(theta) - lhs) + 1e-9);
    }
  }
  return r;
}

CheckResult lieb_midpoint(int draws, std::uint64_t seed) {
  CheckResult r{"lieb_midpoint"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagLieb);
    const Index d = pick(s, 2, 5);
    const SymMatrix h = random_symmetric(s, d);
    const SymMatrix a1 = random_positive(s, d, 0.1, 2.0);
    const SymMatrix a2 = random_positive(s, d, 0.1, 2.0);
    const auto f = [&](const SymMatrix& a) { return matrix_exp(h + matrix_log(a)).trace(); };
    const double mid = f((a1 + a2) * 0.5);
    r.record(mid - 0.5 * (f(a1) + f(a2)) + 1e-8);
  }
  return r;
}

CheckResult peierls(int draws, std::uint64_t seed) {
  CheckResult r{"peierls"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagPeierls);
    const Index d = pick(s, 2, 6);
    const SymMatrix a = random_symmetric(s, d);
    const Matrix u = random_orthogonal(s, d);
    for (auto* f : {&exp_fn, &square_fn}) {
      double lhs = 0.0;
      for (Index i = 0; i < d; ++i) {
        const Vector ui = u.col(i);
        lhs += f(ui.dot(a.entries() * ui));
      }
      r.record(trace_of(a, f) - lhs + 1e-8);
    }
  }
  return r;
}

CheckResult lieb_iteration(int specs, std::uint64_t seed) {
  CheckResult r{"lieb_iteration"};
  constexpr double kThetas[] = {0.25, 0.5, 1.0};
  for (int k = 0; k < specs; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagIteration);
    const Index d = pick(s, 1, 3);
    const Index n = pick(s, 1, 4);
    const Index atoms = pick(s, 2, 3);
    const EnsembleSpec spec = random_finite_support(s, d, atoms, n);
    const auto outcomes = enumerate_sum_distribution(spec);
    for (double theta : kThetas) {
      double lhs = 0.0;
      for (const auto& o : outcomes) lhs += o.probability * trace_of(o.value * theta, &phi_fn);
      const SymMatrix log_mgf = matrix_log(exact_mgf(spec, theta));
      const double rhs =
          matrix_exp(log_mgf * static_cast<double>(n)).trace() - static_cast<double>(d);
      r.record(rhs - lhs + 1e-8);
    }
  }
  return r;
}

CheckResult variance_wrap(int specs, std::uint64_t seed) {
  CheckResult r{"variance_wrap"};
  constexpr double kThetas[] = {0.25, 0.5, 1.0};
  for (int k = 0; k < specs; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagWrap);
    const Index d = pick(s, 1, 3);
    const Index n = pick(s, 1, 4);
    const Index atoms = pick(s, 2, 3);
    const EnsembleSpec spec = random_finite_support(s, d, atoms, n);
    const SymMatrix v = exact_variance(spec);
    const double sigma2 = op_norm(v);
    for (double theta : kThetas) {
      const double lhs = matrix_exp(v * phi(theta)).trace() - static_cast<double>(d);
      const double rhs = (v.trace() / sigma2) * std::exp(phi(theta) * sigma2);
      r.record(rhs - lhs + 1e-8);
    }
  }
  return r;
}

CheckResult supermartingale(int specs, std::uint64_t seed) {
  CheckResult r{"supermartingale"};
  constexpr double kThetas[] = {0.5, 1.0, 2.0};
  for (int k = 0; k < specs; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagMartingale);
    const Index d = pick(s, 1, 3);
    const Index n = pick(s, 1, 6);
    SymMatrix b = random_symmetric(s, d);
    b = b * (1.0 / std::max(1.0, op_norm(b)));
    // Every prefix k <= n is itself a path of length k.
    for (Index len = 1; len <= n; ++len) {
      const EnsembleSpec spec = EnsembleSpec::martingale_adapted(b, len);
      const auto paths = enumerate_martingale_paths(spec);
      for (double theta : kThetas) {
        double lhs = 0.0;
        for (const auto& p : paths) {
          lhs += p.probability * matrix_exp(p.sum * theta - p.variation * phi(theta)).trace();
        }
        r.record(static_cast<double>(d) - lhs + 1e-8);
      }
    }
  }
  return r;
}

CheckResult truncated_mgf(std::uint64_t seed) {
  (void)seed;
  CheckResult r{"truncated_mgf"};
  boost::math::quadrature::exp_sinh<double> integrator;
  constexpr double kScales[] = {0.25, 0.5, 1.0};
  constexpr std::int64_t kLengths[] = {1, 10, 100};
  constexpr double kFractions[] = {0.1, 0.5, 1.0};
  for (double b : kScales) {
    // X = eps E b: E X^2 = 2 b^2, U = 4 b.
    const double second = integrator.integrate(
        [b](double x) { return x > 0.0 ? b * b * std::exp(2.0 * std::log(x) - x) : 0.0; });
    const double u = 4.0 * b;
    for (std::int64_t n : kLengths) {
      const double sigma2 = static_cast<double>(n) * second;
      const double gamma =
          2.0 * u * std::log(16.0 * std::numbers::sqrt2 * static_cast<double>(n) * u * u / sigma2);
      for (double frac : kFractions) {
        const double theta = frac / (2.0 * u);
        const double lhs = integrator.integrate(
            [&](double x) {
              return 0.5 * (std::exp((theta * b - 1.0) * x) + std::exp(-(theta * b + 1.0) * x));
            });
        const double tg = theta * gamma;
        const double rhs = 1.0 + theta * theta * second * phi(tg) / (tg * tg) +
                           8.0 * std::numbers::sqrt2 * theta * theta * u * u *
                               std::exp(-gamma / (2.0 * u));
        r.record(rhs - lhs + 1e-9);
      }
    }
  }
  return r;
}

CheckResult dilation_norm(int vectors, std::uint64_t seed) {
  CheckResult r{"dilation_norm"};
  for (int k = 0; k < vectors; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagDilation);
    const Index d = pick(s, 1, 8);
    Vector y(d);
    for (Index i = 0; i < d; ++i) y(i) = s.normal();
    const double scale = std::max(1.0, y.norm());
    r.record(1e-12 * scale - std::abs(op_norm(paulsen_dilate(y)) - y.norm()));
  }
  return r;
}

CheckResult dilation_square(int vectors, std::uint64_t seed) {
  CheckResult r{"dilation_square"};
  for (int k = 0; k < vectors; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagDilation + 100);
    const Index d = pick(s, 1, 8);
    Vector y(d);
    for (Index i = 0; i < d; ++i) y(i) = s.normal();
    Matrix expected = Matrix::Zero(d + 1, d + 1);
    expected(0, 0) = y.squaredNorm();
    expected.bottomRightCorner(d, d) = y * y.transpose();
    const double err = (paulsen_dilate(y).squared().entries() - expected).cwiseAbs().maxCoeff();
    r.record(1e-12 * std::max(1.0, y.squaredNorm()) - err);
  }
  return r;
}

CheckResult dilation_bound_identity(int draws, std::uint64_t seed) {
  CheckResult r{"dilation_bound_identity"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagIdentity);
    const double sigma2 = log_uniform(s, 1e-2, 1e2);
    const double t = log_uniform(s, 1e-2, 1e2);
    const double u = log_uniform(s, 0.1, 10.0);
    const double vec = vector_bernstein_l2(sigma2, t, u).raw;
    BoundRequest req;
    req.n = 1;
    req.d = 2;
    req.sigma2 = sigma2;
    req.U = u;
    req.t = t;
    req.trace_var = 2.0 * sigma2;
    const double doubled_trace = bernstein_bounded_tail(req).raw;
    req.trace_var = sigma2;
    const double twice = 2.0 * bernstein_bounded_tail(req).raw;
    // Exact equality: slack is 0 on success and negative otherwise.
    r.record(vec == doubled_trace && vec == twice ? 0.0 : -std::abs(vec - doubled_trace) - 1e-300);
  }
  return r;
}

CheckResult projection_domination(int draws, std::uint64_t seed) {
  CheckResult r{"projection_domination"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagProjection);
    const Index d = pick(s, 2, 8);
    const Index j = pick(s, 1, d);
    const SymMatrix a = random_symmetric(s, d);
    const SymMatrix lhs = project_leading(a.squared(), j);
    const SymMatrix rhs = project_leading(a, j).squared();
    r.record(lambda_min(lhs - rhs) + 1e-10);
  }
  return r;
}

CheckResult v_factor_cap(int draws, std::uint64_t seed) {
  CheckResult r{"v_factor_cap"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagVCap);
    const double sigma = log_uniform(s, 1.0, 1e3);
    const double t = sigma * log_uniform(s, 1.0, 1e3);
    r.record(44.0 - v_factor(sigma * sigma, t));
  }
  // The extreme corner of the region.
  r.record(44.0 - v_factor(1.0, 1.0));
  return r;
}

CheckResult factor_monotonicity(int draws, std::uint64_t seed) {
  CheckResult r{"factor_monotonicity"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagMonotone);
    const double sigma2 = log_uniform(s, 1e-2, 1e2);
    double prev_r = std::numeric_limits<double>::infinity();
    double prev_v = prev_r;
    double prev_psi = -1.0;
    for (int i = 1; i <= 60; ++i) {
      const double t = std::pow(10.0, -2.0 + 4.0 * i / 60.0) * std::sqrt(sigma2);
      const double rv = r_factor(sigma2, t);
      const double vv = v_factor(sigma2, t);
      const double pv = psi(sigma2, t);
      const double slack = std::min({prev_r - rv, prev_v - vv, pv - prev_psi});
      r.record(slack > 0.0 ? 0.0 : slack - 1e-300);
      prev_r = rv;
      prev_v = vv;
      prev_psi = pv;
    }
  }
  return r;
}

CheckResult branch_continuity(int draws, std::uint64_t seed) {
  CheckResult r{"branch_continuity"};
  for (int k = 0; k < draws; ++k) {
    CounterStream s(seed, static_cast<std::uint64_t>(k), kTagBranch);
    BoundRequest req;
    req.d = pick(s, 1, 64);
    req.n = pick(s, 1, 1000);
    req.U = log_uniform(s, 0.1, 10.0);
    req.sigma2 = static_cast<double>(req.n) * req.U * req.U * log_uniform(s, 1e-3, 1.0);
    req.trace_var = req.sigma2 * (1.0 + (static_cast<double>(req.d) - 1.0) * s.uniform());
    req.t = 1.0;
    const SubexpBranches probe = subexp_branches(req);
    req.t = probe.threshold;
    const SubexpBranches at = subexp_branches(req);
    const double rel = std::abs(at.subgaussian - at.subexponential) /
                       std::max(at.subgaussian, at.subexponential);
    r.record(1e-12 - rel);
  }
  return r;
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
  return {
      entropy_lower_bound(),
      exp_ratio_bound(),
      theta_star_optimality(1000, seed),
      theta_star_chain(1000, seed),
      moment_domination(200, seed),
      lieb_midpoint(1000, seed),
      peierls(1000, seed),
      lieb_iteration(40, seed),
      variance_wrap(40, seed),
      supermartingale(20, seed),
      truncated_mgf(seed),
      dilation_norm(10000, seed),
      dilation_square(10000, seed),
      dilation_bound_identity(1000, seed),
      projection_domination(500, seed),
      v_factor_cap(10000, seed),
      factor_monotonicity(200, seed),
      branch_continuity(100, seed),
  };
}

ProjectionStudy projection_convergence(Index d, Index n, std::uint64_t seed,
                                       std::vector<Index> levels) {
  // B_i has entries R_kl / (k l)^2 with R symmetric uniform in [-1, 1].
  std::vector<SymMatrix> basis;
  for (Index i = 0; i < n; ++i) {
    CounterStream s(seed, static_cast<std::uint64_t>(i), kTagStudy);
    Matrix m(d, d);
    for (Index k = 0; k < d; ++k) {
      for (Index l = k; l < d; ++l) {
        const double kl = static_cast<double>((k + 1) * (l + 1));
        m(k, l) = (2.0 * s.uniform() - 1.0) / (kl * kl);
        m(l, k) = m(k, l);
      }
    }
    const SymMatrix b(m);
    basis.push_back(b * (1.0 / std::max(1.0, op_norm(b))));
  }
  const EnsembleSpec spec = EnsembleSpec::rademacher(basis);
  const SymMatrix sum = SymMatrix::symmetrized(sample_sum(spec, seed, 0));

  ProjectionStudy study;
  {
    SymMatrix full = SymMatrix::zero(d);
    for (const auto& b : basis) full = full + b.squared();
    study.full_intdim = intrinsic_dimension(full.trace(), op_norm(full));
  }
  for (Index j : levels) {
    study.j.push_back(j);
    study.residual_norm.push_back(op_norm(sum - project_leading(sum, j)));
    SymMatrix var = SymMatrix::zero(d);
    for (const auto& b : basis) var = var + project_leading(b, j).squared();
    study.intdim.push_back(intrinsic_dimension(var.trace(), op_norm(var)));
  }
  study.monotone = true;
  for (std::size_t k = 1; k < study.residual_norm.size(); ++k) {
    if (!(study.residual_norm[k] < study.residual_norm[k - 1] || study.residual_norm[k] == 0.0)) {
      study.monotone = false;
    }
  }
  const double first = study.residual_norm.front();
  study.converged = study.residual_norm.back() < 1e-6 * first &&
                    std::abs(study.intdim.back() - study.full_intdim) <= 1e-6;
  return study;
}

TruncationGrowth truncation_trace_growth(Index d, double p, int points) {
  TruncationGrowth g;
  g.cap = static_cast<double>(d);
  Vector lambda(d);
  for (Index i = 0; i < d; ++i) lambda(i) = 1.0 / std::pow(static_cast<double>(i + 1), p);
  const SymMatrix ew = SymMatrix::diagonal(lambda);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < points; ++k) {
    const double t = std::pow(10.0, 2.0 * k / (points - 1));
    const double tr = trace_unit_truncation(ew * t);
    g.t.push_back(t);
    g.truncated_trace.push_back(tr);
    const double x = std::log(t);
    const double y = std::log(tr);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(points);
  g.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return g;
}

}  // namespace mbern::checks

#include "mbern_cli/run.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "mbern/errors.hpp"
#include "mbern/montecarlo.hpp"

namespace mbern::cli {

namespace {

constexpr std::uint64_t kMomentTrials = 20000;
constexpr std::uint64_t kMomentSeed = 0x5eed;

// Everything needed to evaluate one bound on a t-grid.
struct BoundPlan {
  Regime regime = Regime::bounded;
  BoundFn fn;
  // Baseline inputs.
  std::int64_t d = 1;
  double sigma2 = 0.0;
  double U = 1.0;
  double intdim = 1.0;
  bool degenerate = false;
};

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

template <typename T>
T require(const std::optional<T>& v, const char* name) {
  if (!v) config_fail(std::string("bound.") + name + " is required for this regime");
  return *v;
}

BoundResult zero_bound(Regime regime) { return BoundResult::make(0.0, regime); }

BoundPlan plan_from_explicit(const BoundConfig& b) {
  BoundPlan plan;
  plan.regime = *b.regime;
  switch (plan.regime) {
    case Regime::bounded:
    case Regime::subgaussian:
    case Regime::subexponential: {
      BoundRequest req;
      req.n = require(b.n, "n");
      req.d = require(b.d, "d");
      req.sigma2 = require(b.sigma2, "sigma2");
      req.U = b.U.value_or(1.0);
      req.trace_var = b.trace_var.value_or(req.sigma2);
      req.t = 1.0;
      req.validate();
      plan.d = req.d;
      plan.sigma2 = req.sigma2;
      plan.U = req.U;
      plan.intdim = intrinsic_dimension(req.trace_var, req.sigma2);
      const bool bounded = plan.regime == Regime::bounded;
      plan.fn = [req, bounded](double t) {
        BoundRequest r = req;
        r.t = t;
        return bounded ? bernstein_bounded_tail(r) : bernstein_subexp_tail(r);
      };
      break;
    }
    case Regime::martingale: {
      const SymMatrix ew(require(b.expected_w, "expected_w"));
      const double sigma2 = require(b.sigma2, "sigma2");
      const double u = b.U.value_or(1.0);
      plan.d = ew.dim();
      plan.sigma2 = sigma2;
      plan.U = u;
      plan.fn = [ew, sigma2, u](double t) { return martingale_tail(ew, sigma2, t, u); };
      break;
    }
    case Regime::vector_l2: {
      const double sigma2 = require(b.sigma2, "sigma2");
      const double u = b.U.value_or(1.0);
      plan.sigma2 = sigma2;
      plan.U = u;
      plan.fn = [sigma2, u](double t) { return vector_bernstein_l2(sigma2, t, u); };
      break;
    }
    case Regime::vector_linf: {
      const double trace = require(b.trace_var, "trace_var");
      const double sigma2 = require(b.sigma2, "sigma2");
      plan.sigma2 = sigma2;
      plan.fn = [trace, sigma2](double t) { return vector_bernstein_linf(trace, sigma2, t); };
      break;
    }
    case Regime::kernel: {
      XiParameters xi;
      const std::int64_t n = require(b.n, "n");
      xi.kappa = require(b.kappa, "kappa");
      xi.lk_norm = require(b.lk_norm, "lk_norm");
      xi.xi_intdim = require(b.xi_intdim, "xi_intdim");
      plan.fn = [xi, n](double t) { return cor10_certificate(xi, n, t); };
      break;
    }
  }
  return plan;
}

Regime default_regime(const EnsembleConfig& e) {
  if (e.is_vector()) return Regime::vector_l2;
  if (e.family == "SubExpScaled") return Regime::subexponential;
  if (e.family == "MartingaleAdapted") return Regime::martingale;
  return Regime::bounded;
}

bool compatible(Regime requested, Regime natural) {
  if (natural == Regime::subexponential) {
    return requested == Regime::subexponential || requested == Regime::subgaussian;
  }
  return requested == natural;
}

BoundPlan plan_from_ensemble(const EnsembleConfig& e, const BoundConfig& b) {
  const Regime natural = default_regime(e);
  if (b.regime && !compatible(*b.regime, natural)) {
    config_fail("bound.regime '" + std::string(to_string(*b.regime)) + "' does not apply to " +
                e.family);
  }
  BoundPlan plan;
  plan.regime = natural;

  if (e.is_vector()) {
    // Unit vectors: sum E|Y_i|^2 = n, |Y_i| = 1.
    const double sigma2 = b.sigma2.value_or(static_cast<double>(e.n));
    const double u = b.U.value_or(1.0);
    plan.d = e.d + 1;
    plan.sigma2 = sigma2;
    plan.U = u;
    plan.intdim = 2.0;
    plan.fn = [sigma2, u](double t) { return vector_bernstein_l2(sigma2, t, u); };
    return plan;
  }

  const EnsembleSpec spec = e.build();
  const EnsembleParams params = ensemble_params(spec, kMomentTrials, kMomentSeed);
  plan.d = spec.dim();
  plan.U = b.U.value_or(params.U);

  if (natural == Regime::martingale) {
    const SymMatrix ew = b.expected_w ? SymMatrix(*b.expected_w)
                                      : estimate_variance(spec, kMomentTrials, kMomentSeed).mean;
    const double b_norm = op_norm(std::get<MartingaleParams>(spec.params()).direction);
    const double event = b.sigma2.value_or(static_cast<double>(e.n) * b_norm * b_norm);
    plan.sigma2 = op_norm(ew);
    plan.intdim = plan.sigma2 > 0.0 ? intrinsic_dimension(ew.trace(), plan.sigma2) : 0.0;
    plan.degenerate = plan.sigma2 <= 0.0 || !(event > 0.0);
    if (plan.degenerate) {
      plan.fn = [](double) { return zero_bound(Regime::martingale); };
    } else {
      const double u = plan.U;
      plan.fn = [ew, event, u](double t) { return martingale_tail(ew, event, t, u); };
    }
    return plan;
  }

  if (params.degenerate && !b.sigma2) {
    // S_n = 0 almost surely.
    plan.degenerate = true;
    plan.sigma2 = 0.0;
    plan.intdim = 0.0;
    plan.fn = [natural](double) { return zero_bound(natural); };
    return plan;
  }
  BoundRequest req;
  req.n = spec.length();
  req.d = spec.dim();
  req.sigma2 = b.sigma2.value_or(params.sigma2);
  req.U = plan.U;
  req.trace_var = b.trace_var.value_or(params.trace_var);
  req.t = 1.0;
  req.validate();
  plan.sigma2 = req.sigma2;
  plan.intdim = intrinsic_dimension(req.trace_var, req.sigma2);
  const bool bounded = natural == Regime::bounded;
  plan.fn = [req, bounded](double t) {
    BoundRequest r = req;
    r.t = t;
    return bounded ? bernstein_bounded_tail(r) : bernstein_subexp_tail(r);
  };
  return plan;
}

BoundPlan make_plan(const ExperimentConfig& cfg) {
  try {
    BoundPlan plan = cfg.ensemble ? plan_from_ensemble(*cfg.ensemble, cfg.bound)
                                  : plan_from_explicit(cfg.bound);
    // Evaluate once per grid point so parameter errors surface before any simulation.
    for (double t : cfg.t_grid) (void)plan.fn(t);
    return plan;
  } catch (const InvalidRequest& e) {
    throw ConfigError(e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what());
  } catch (const InvalidMatrix& e) {
    throw ConfigError(e.what());
  } catch (const NotPSD& e) {
    throw ConfigError(e.what());
  }
}

ReportRow base_row(const ExperimentConfig& cfg, double t) {
  ReportRow r;
  r.t = t;
  r.ensemble_id = cfg.ensemble_id();
  return r;
}

void fill_bound(ReportRow& row, const BoundResult& b) {
  row.bound_raw = b.raw;
  row.bound_clipped = b.clipped;
  row.regime = std::string(to_string(b.regime));
}

void fill_estimate(ReportRow& row, const TailEstimate& e) {
  row.p_hat = e.p_hat;
  row.ci_low = e.ci_low;
  row.ci_high = e.ci_high;
}

std::vector<TailEstimate> simulate(const ExperimentConfig& cfg, const BoundPlan& plan,
                                   unsigned threads) {
  const EnsembleConfig& e = *cfg.ensemble;
  if (e.is_vector()) {
    return estimate_vector_tail(e.build_vector(), cfg.t_grid, cfg.sim.trials, cfg.sim.seed,
                                cfg.sim.confidence, threads);
  }
  SimConfig sim{e.build(), cfg.t_grid, cfg.sim.trials, cfg.sim.seed, cfg.sim.confidence};
  if (plan.regime == Regime::martingale) {
    const double b_norm = op_norm(std::get<MartingaleParams>(sim.spec.params()).direction);
    const double event = cfg.bound.sigma2.value_or(static_cast<double>(e.n) * b_norm * b_norm);
    return estimate_joint_tail_martingale(sim, event, threads);
  }
  return estimate_tail(sim, threads);
}

bool exact_feasible(const ExperimentConfig& cfg) {
  if (!cfg.ensemble || cfg.ensemble->family != "FiniteSupport") return false;
  const double outcomes = std::pow(static_cast<double>(cfg.ensemble->atoms.size()),
                                   static_cast<double>(cfg.ensemble->n));
  return outcomes <= kMaxOutcomes;
}

Report run_bound(const ExperimentConfig& cfg) {
  const BoundPlan plan = make_plan(cfg);
  Report report;
  for (double t : cfg.t_grid) {
    ReportRow row = base_row(cfg, t);
    fill_bound(row, plan.fn(t));
    report.rows.push_back(std::move(row));
  }
  return report;
}

Report run_simulate(const ExperimentConfig& cfg, unsigned threads) {
  const BoundPlan plan = make_plan(cfg);
  Report report;
  for (const auto& e : simulate(cfg, plan, threads)) {
    ReportRow row = base_row(cfg, e.t);
    fill_estimate(row, e);
    row.seed = cfg.sim.seed;
    report.rows.push_back(std::move(row));
  }
  return report;
}

Report run_compare(const ExperimentConfig& cfg, unsigned threads) {
  const BoundPlan plan = make_plan(cfg);
  Report report;
  if (cfg.sim.exact && exact_feasible(cfg)) {
    const std::vector<double> p = exact_tail(cfg.ensemble->build(), cfg.t_grid);
    const DominanceReport dom = certify_dominance_exact(cfg.t_grid, p, plan.fn);
    for (const auto& d : dom.rows) {
      ReportRow row = base_row(cfg, d.t);
      fill_bound(row, d.bound);
      row.exact_p = d.exact_p;
      row.dominated = d.dominated;
      report.rows.push_back(std::move(row));
    }
    report.pass = dom.pass;
  } else {
    const auto estimates = simulate(cfg, plan, threads);
    const DominanceReport dom = certify_dominance(estimates, plan.fn);
    for (std::size_t i = 0; i < dom.rows.size(); ++i) {
      const auto& d = dom.rows[i];
      ReportRow row = base_row(cfg, d.t);
      fill_bound(row, d.bound);
      fill_estimate(row, estimates[i]);
      row.dominated = d.dominated;
      row.seed = cfg.sim.seed;
      report.rows.push_back(std::move(row));
    }
    report.pass = dom.pass;
  }
  for (double t : cfg.t_grid) {
    BaselineRow b{t, 0.0, 0.0};
    if (!plan.degenerate && plan.sigma2 > 0.0) {
      b.classical = classical_baseline(plan.d, plan.sigma2, t, plan.U);
      b.intdim_poly = intdim_poly_baseline(plan.intdim, plan.sigma2, t, plan.U);
    }
    report.baselines.push_back(b);
  }
  return report;
}

Report run_kernel(const ExperimentConfig& cfg, unsigned threads) {
  const KernelSection& k = *cfg.kernel;
  const NystromBasis basis(k.spec, k.m);
  const XiParameters xi = xi_parameters(basis);
  const std::int64_t n = k.n;

  const auto hits = count_exceedances(
      cfg.t_grid, k.samples, threads, [&](std::uint64_t trial) -> std::optional<double> {
        const SampleSet s = draw_sample(k.spec, n, cfg.sim.seed, trial);
        return basis.operator_deviation(s.points);
      });
  const auto estimates = tail_from_counts(cfg.t_grid, hits, k.samples, cfg.sim.confidence);

  Report report;
  for (const auto& e : estimates) {
    const BoundResult b = cor10_certificate(xi, n, e.t);
    ReportRow row = base_row(cfg, e.t);
    fill_bound(row, b);
    fill_estimate(row, e);
    row.dominated = e.ci_low <= b.clipped;
    row.seed = cfg.sim.seed;
    // Rows below the validity threshold carry no claim.
    if (b.valid && !*row.dominated) report.pass = false;
    report.rows.push_back(std::move(row));
  }

  nlohmann::json meta;
  meta["kappa"] = xi.kappa;
  meta["lk_norm"] = xi.lk_norm;
  meta["xi_intdim"] = xi.xi_intdim;
  meta["validity_threshold"] = cor10_threshold(xi, n);
  meta["basis_rank"] = basis.rank();
  meta["node_residual"] = basis.node_residual();
  // Null when the doubled grid exceeds the node budget.
  try {
    meta["refinement_delta"] = xi_refinement_delta(k.spec, k.m);
  } catch (const DomainError&) {
    meta["refinement_delta"] = nullptr;
  }
  report.meta = std::move(meta);
  return report;
}

Report run_inequalities(const ExperimentConfig& cfg) {
  Report report;
  report.checks = checks::run_all(cfg.sim.seed);

  const checks::ProjectionStudy study = checks::projection_convergence();
  checks::CheckResult proj{"projection_convergence"};
  proj.cases = study.j.size();
  proj.passed = study.monotone && study.converged;
  proj.worst_margin = 1e-6 * study.residual_norm.front() - study.residual_norm.back();
  report.checks.push_back(proj);

  const checks::TruncationGrowth growth = checks::truncation_trace_growth();
  checks::CheckResult trunc{"truncation_growth"};
  trunc.cases = growth.t.size();
  double cap_slack = growth.cap;
  for (double v : growth.truncated_trace) cap_slack = std::min(cap_slack, growth.cap - v);
  trunc.worst_margin = std::min({growth.slope - 0.4, 0.6 - growth.slope, cap_slack});
  trunc.passed = trunc.worst_margin >= 0.0;
  report.checks.push_back(trunc);

  for (const auto& c : report.checks) report.pass = report.pass && c.passed;
  return report;
}

std::filesystem::path companion(const std::filesystem::path& out, const std::string& tag,
                                const std::string& ext) {
  return out.parent_path() / (out.stem().string() + "." + tag + "." + ext);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

void apply_flags(ExperimentConfig& cfg, const RunFlags& flags) {
  if (flags.seed) cfg.sim.seed = *flags.seed;
  if (flags.trials) {
    if (*flags.trials == 0) throw ConfigError("--trials must be positive");
    cfg.sim.trials = *flags.trials;
    if (cfg.kernel) cfg.kernel->samples = *flags.trials;
  }
  if (flags.out) cfg.output.path = *flags.out;
  if (flags.format) cfg.output.format = *flags.format;
  if (flags.exact) cfg.sim.exact = true;
}

Report execute(const ExperimentConfig& cfg, unsigned threads) {
  threads = std::max(1u, threads);
  switch (cfg.kind) {
    case Kind::bound:
      return run_bound(cfg);
    case Kind::simulate:
      return run_simulate(cfg, threads);
    case Kind::compare:
      return run_compare(cfg, threads);
    case Kind::kernel:
      return run_kernel(cfg, threads);
    case Kind::inequalities:
      return run_inequalities(cfg);
  }
  throw ConfigError("unknown kind");
}

unsigned default_threads() {
  if (const char* env = std::getenv("MB_THREADS")) {
    unsigned v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto res = std::from_chars(env, end, v);
    if (res.ec == std::errc() && res.ptr == end && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(const std::string& config_path, const RunFlags& flags, std::ostream& out,
        std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_flags(cfg, flags);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  if (cfg.kind == Kind::compare && flags.exact && !exact_feasible(cfg)) {
    err << "note: exact enumeration not feasible for this ensemble; using simulation\n";
  }

  Report report;
  try {
    report = execute(cfg, flags.threads.value_or(default_threads()));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }

  // Render everything before creating any file.
  const Format fmt = cfg.output.format;
  const std::string ext(to_string(fmt));
  std::ostringstream main_out;
  if (cfg.kind == Kind::inequalities) {
    print_check_table(err, report.checks);
    write_checks(main_out, report.checks, fmt);
  } else {
    write_rows(main_out, report.rows, fmt);
  }

  try {
    if (cfg.output.path.empty()) {
      out << main_out.str();
    } else {
      const std::filesystem::path path(cfg.output.path);
      write_file(path, main_out.str());
      if (!report.baselines.empty()) {
        std::ostringstream b;
        write_baselines(b, report.baselines, fmt);
        write_file(companion(path, "baselines", ext), b.str());
      }
      if (!report.meta.is_null()) {
        write_file(companion(path, "meta", "json"), report.meta.dump(2) + "\n");
      }
    }
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }

  if (!report.pass) {
    err << (cfg.kind == Kind::inequalities ? "inequality check failed\n"
                                           : "dominance failure: some row is not dominated\n");
    return kExitDominanceFailure;
  }
  return kExitOk;
}

}  // namespace mbern::cli

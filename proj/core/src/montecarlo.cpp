#include "mbern/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "mbern/binomial.hpp"
#include "mbern/errors.hpp"

namespace mbern {

namespace {

double matrix_norm(const Matrix& s) { return op_norm(SymMatrix::symmetrized(s)); }

// Splits [0, trials) into `threads` contiguous chunks and runs body(begin, end, worker).
void run_chunks(std::uint64_t trials, unsigned threads,
                const std::function<void(std::uint64_t, std::uint64_t, unsigned)>& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || trials < 2) {
    body(0, trials, 0);
    return;
  }
  const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = trials * w / workers;
      const std::uint64_t end = trials * (w + 1) / workers;
      pool.emplace_back([&, begin, end, w] {
        try {
          body(begin, end, w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void validate_t_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw DomainError("t grid must be non-empty");
  if (!(t_grid.front() > 0.0)) throw DomainError("t grid must be strictly positive");
  for (std::size_t j = 1; j < t_grid.size(); ++j) {
    if (!(t_grid[j] > t_grid[j - 1])) throw DomainError("t grid must be strictly increasing");
  }
  for (double t : t_grid) {
    if (!std::isfinite(t)) throw DomainError("t grid must be finite");
  }
}

void SimConfig::validate() const {
  validate_t_grid(t_grid);
  if (trials == 0) throw DomainError("trials must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must be in (0, 1)");
}

std::vector<TailEstimate> tail_from_counts(std::span<const double> t_grid,
                                           std::span<const std::uint64_t> hits,
                                           std::uint64_t trials, double confidence) {
  std::vector<TailEstimate> out;
  out.reserve(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const ConfidenceInterval ci = clopper_pearson(hits[j], trials, confidence);
    out.push_back({t_grid[j], hits[j], trials,
                   static_cast<double>(hits[j]) / static_cast<double>(trials), ci.low, ci.high});
  }
  return out;
}

std::vector<std::uint64_t> count_exceedances(
    std::span<const double> t_grid, std::uint64_t trials, unsigned threads,
    const std::function<std::optional<double>(std::uint64_t)>& norm_of) {
  const std::size_t m = t_grid.size();
  // histogram[k] counts trials whose norm exceeds exactly the first k thresholds.
  std::vector<std::vector<std::uint64_t>> local(std::max(1u, threads),
                                                std::vector<std::uint64_t>(m + 1, 0));
  run_chunks(trials, threads, [&](std::uint64_t begin, std::uint64_t end, unsigned w) {
    auto& histogram = local[w];
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      const std::optional<double> norm = norm_of(trial);
      if (!norm) continue;
      const auto k = static_cast<std::size_t>(
          std::lower_bound(t_grid.begin(), t_grid.end(), *norm) - t_grid.begin());
      ++histogram[k];
    }
  });
  std::vector<std::uint64_t> histogram(m + 1, 0);
  for (const auto& h : local) {
    for (std::size_t k = 0; k <= m; ++k) histogram[k] += h[k];
  }
  // norm > t_j  <=>  k > j.
  std::vector<std::uint64_t> hits(m, 0);
  std::uint64_t running = 0;
  for (std::size_t j = m; j-- > 0;) {
    running += histogram[j + 1];
    hits[j] = running;
  }
  return hits;
}

std::vector<TailEstimate> estimate_tail(const SimConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto hits = count_exceedances(cfg.t_grid, cfg.trials, threads, [&](std::uint64_t trial) {
    return std::optional<double>(matrix_norm(sample_sum(cfg.spec, cfg.seed, trial)));
  });
  return tail_from_counts(cfg.t_grid, hits, cfg.trials, cfg.confidence);
}

std::vector<TailEstimate> estimate_joint_tail_martingale(const SimConfig& cfg, double sigma2,
                                                         unsigned threads) {
  cfg.validate();
  if (cfg.spec.family() != Family::MartingaleAdapted) {
    throw InvalidSpec("joint martingale tail needs a MartingaleAdapted ensemble");
  }
  const auto hits = count_exceedances(
      cfg.t_grid, cfg.trials, threads, [&](std::uint64_t trial) -> std::optional<double> {
        const MartingalePath path = sample_martingale_path(cfg.spec, cfg.seed, trial);
        if (lambda_max(path.variation) > sigma2) return std::nullopt;
        return op_norm(path.sum);
      });
  return tail_from_counts(cfg.t_grid, hits, cfg.trials, cfg.confidence);
}

std::vector<TailEstimate> estimate_vector_tail(const SphereVectorSpec& spec,
                                               std::span<const double> t_grid,
                                               std::uint64_t trials, std::uint64_t seed,
                                               double confidence, unsigned threads) {
  validate_t_grid(t_grid);
  if (trials == 0) throw DomainError("trials must be positive");
  const auto hits = count_exceedances(t_grid, trials, threads, [&](std::uint64_t trial) {
    return std::optional<double>(sample_vector_sum(spec, seed, trial).norm());
  });
  return tail_from_counts(t_grid, hits, trials, confidence);
}

MeanEstimate estimate_mean_norm(const EnsembleSpec& spec, std::uint64_t trials,
                                std::uint64_t seed, unsigned threads) {
  if (trials < 2) throw DomainError("mean estimate needs at least 2 trials");
  // Per-trial norms are stored so the reduction order is fixed.
  std::vector<double> norms(trials);
  run_chunks(trials, threads, [&](std::uint64_t begin, std::uint64_t end, unsigned) {
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      norms[trial] = matrix_norm(sample_sum(spec, seed, trial));
    }
  });
  double sum = 0.0;
  for (double v : norms) sum += v;
  const double mean = sum / static_cast<double>(trials);
  double ss = 0.0;
  for (double v : norms) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(trials - 1);
  return {mean, std::sqrt(var / static_cast<double>(trials)), trials};
}

std::vector<double> exact_tail(const EnsembleSpec& spec, std::span<const double> t_grid) {
  const auto outcomes = enumerate_sum_distribution(spec);
  std::vector<double> p(t_grid.size(), 0.0);
  for (const auto& o : outcomes) {
    const double norm = op_norm(o.value);
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      if (norm > t_grid[j]) p[j] += o.probability;
    }
  }
  return p;
}

double exact_mean_norm(const EnsembleSpec& spec) {
  double mean = 0.0;
  for (const auto& o : enumerate_sum_distribution(spec)) mean += o.probability * op_norm(o.value);
  return mean;
}

DominanceReport certify_dominance(std::span<const TailEstimate> estimates, const BoundFn& bound) {
  DominanceReport report;
  report.pass = true;
  for (const auto& e : estimates) {
    DominanceRow row;
    row.t = e.t;
    row.p_hat = e.p_hat;
    row.ci_low = e.ci_low;
    row.ci_high = e.ci_high;
    row.bound = bound(e.t);
    row.dominated = row.ci_low <= row.bound.clipped;
    report.pass = report.pass && row.dominated;
    report.regime = row.bound.regime;
    report.rows.push_back(std::move(row));
  }
  return report;
}

DominanceReport certify_dominance_exact(std::span<const double> t_grid,
                                        std::span<const double> exact_p, const BoundFn& bound) {
  if (t_grid.size() != exact_p.size()) throw DimensionMismatch("grid and probabilities differ");
  DominanceReport report;
  report.pass = true;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    DominanceRow row;
    row.t = t_grid[j];
    row.p_hat = exact_p[j];
    row.ci_low = exact_p[j];
    row.ci_high = exact_p[j];
    row.exact_p = exact_p[j];
    row.bound = bound(t_grid[j]);
    row.dominated = exact_p[j] <= row.bound.clipped;
    report.pass = report.pass && row.dominated;
    report.regime = row.bound.regime;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace mbern

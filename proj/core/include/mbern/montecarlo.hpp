#pragma once

// Empirical tail estimation and bound-dominance certification.
//
// Trials are independent work units; per-worker integer hit counts are summed
// at the end, so results are identical for any worker count.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mbern/bounds.hpp"
#include "mbern/ensembles.hpp"

namespace mbern {

struct SimConfig {
  EnsembleSpec spec;
  std::vector<double> t_grid;  // strictly increasing, positive
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double confidence = 0.99;

  void validate() const;
};

struct TailEstimate {
  double t = 0.0;
  std::uint64_t hits = 0;  // #{norm > t}
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
};

struct DominanceRow {
  double t = 0.0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::optional<double> exact_p;
  BoundResult bound;
  bool dominated = false;
};

struct DominanceReport {
  std::vector<DominanceRow> rows;
  bool pass = false;
  EnsembleParams params;
  Regime regime = Regime::bounded;
};

using BoundFn = std::function<BoundResult(double)>;

// Validates a threshold grid: non-empty, strictly increasing, min > 0.
void validate_t_grid(std::span<const double> t_grid);

// Turns per-sample norms into tail estimates; used by every estimator below.
std::vector<TailEstimate> tail_from_counts(std::span<const double> t_grid,
                                           std::span<const std::uint64_t> hits,
                                           std::uint64_t trials, double confidence);

// Runs `trials` independent trials across `threads` workers. `norm_of(trial)`
// returns the statistic for one trial, or nullopt when the trial does not
// count (for joint events). Returns hit counts per grid point.
std::vector<std::uint64_t> count_exceedances(
    std::span<const double> t_grid, std::uint64_t trials, unsigned threads,
    const std::function<std::optional<double>(std::uint64_t)>& norm_of);

std::vector<TailEstimate> estimate_tail(const SimConfig& cfg, unsigned threads = 1);

// P(||S_n|| > t, lambda_max(W_n) <= sigma2) for a MartingaleAdapted spec.
std::vector<TailEstimate> estimate_joint_tail_martingale(const SimConfig& cfg, double sigma2,
                                                         unsigned threads = 1);

std::vector<TailEstimate> estimate_vector_tail(const SphereVectorSpec& spec,
                                               std::span<const double> t_grid,
                                               std::uint64_t trials, std::uint64_t seed,
                                               double confidence, unsigned threads = 1);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
};
MeanEstimate estimate_mean_norm(const EnsembleSpec& spec, std::uint64_t trials,
                                std::uint64_t seed, unsigned threads = 1);

// P(||S_n|| > t) at every grid point by exhaustive enumeration (FiniteSupport).
std::vector<double> exact_tail(const EnsembleSpec& spec, std::span<const double> t_grid);
// E ||S_n|| by enumeration.
double exact_mean_norm(const EnsembleSpec& spec);

// Row-wise ci_low <= clipped bound.
DominanceReport certify_dominance(std::span<const TailEstimate> estimates, const BoundFn& bound);
// Exact mode: the exact probability replaces ci_low.
DominanceReport certify_dominance_exact(std::span<const double> t_grid,
                                        std::span<const double> exact_p, const BoundFn& bound);

}  // namespace mbern

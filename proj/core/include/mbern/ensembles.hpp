#pragma once

// Random matrix and vector ensembles: declarative specs, deterministic
// samplers, exact moments, and exhaustive-enumeration oracles.

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "mbern/spectral.hpp"

namespace mbern {

enum class Family {
  FixedBasisRademacher,  // X_i = eps_i B_i
  RankOneSphere,         // X_i = u u^T - I/d, u uniform on the sphere
  FiniteSupport,         // X_i iid from an explicit mean-zero atom list
  SubExpScaled,          // X_i = eps_i E_i B, E_i ~ Exponential(1)
  MartingaleAdapted,     // X_i = eps_i B / (1 + ||S_{i-1}||)
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

struct Atom {
  SymMatrix value;
  double probability;
};

struct RademacherParams {
  std::vector<SymMatrix> basis;
};
struct SphereParams {};
struct FiniteSupportParams {
  std::vector<Atom> atoms;
};
struct SubExpParams {
  SymMatrix scale;
};
struct MartingaleParams {
  SymMatrix direction;
};

using EnsembleParamsVariant =
    std::variant<RademacherParams, SphereParams, FiniteSupportParams, SubExpParams,
                 MartingaleParams>;

class EnsembleSpec {
 public:
  // Each factory validates its invariants and throws InvalidSpec.
  static EnsembleSpec rademacher(std::vector<SymMatrix> basis);
  static EnsembleSpec rank_one_sphere(Index d, Index n);
  static EnsembleSpec finite_support(std::vector<Atom> atoms, Index n);
  static EnsembleSpec subexp_scaled(SymMatrix b, Index n);
  static EnsembleSpec martingale_adapted(SymMatrix b, Index n);

  Family family() const { return family_; }
  Index dim() const { return d_; }
  Index length() const { return n_; }
  const EnsembleParamsVariant& params() const { return params_; }

 private:
  EnsembleSpec(Family f, Index d, Index n, EnsembleParamsVariant p)
      : family_(f), d_(d), n_(n), params_(std::move(p)) {}

  Family family_;
  Index d_;
  Index n_;
  EnsembleParamsVariant params_;
};

// Independent mean-zero vectors Y_i uniform on the unit sphere of R^d.
struct SphereVectorSpec {
  Index d = 1;
  Index n = 1;
};

struct EnsembleParams {
  double sigma2 = 0.0;     // || sum E X_i^2 ||  (|| E W_n || for martingales)
  double U = 0.0;          // norm scale used by the matching bound
  double trace_var = 0.0;  // tr sum E X_i^2
  double intdim = 0.0;     // trace_var / sigma2
  bool exact = true;       // false when moments are Monte Carlo estimates
  std::uint64_t sample_size = 0;  // trials behind an estimate
  bool degenerate = false;        // zero variance: S_n = 0 almost surely
};

// The n summands of trial `trial`. Pure in (spec, seed, trial).
std::vector<SymMatrix> sample(const EnsembleSpec& spec, std::uint64_t seed, std::uint64_t trial);
// S_n of the same trial without materializing the summands.
Matrix sample_sum(const EnsembleSpec& spec, std::uint64_t seed, std::uint64_t trial);

Vector sample_vector_sum(const SphereVectorSpec& spec, std::uint64_t seed, std::uint64_t trial);

// sum_i E X_i^2 in closed form. Throws NotExact for MartingaleAdapted.
SymMatrix exact_variance(const EnsembleSpec& spec);

struct VarianceEstimate {
  SymMatrix mean;
  Matrix standard_error;
  std::uint64_t trials;
};
// Monte Carlo mean of sum_i E_{i-1} X_i^2 (which is sum_i X_i^2 for the
// independent families and W_n for the martingale family).
VarianceEstimate estimate_variance(const EnsembleSpec& spec, std::uint64_t trials,
                                   std::uint64_t seed);

// E exp(theta X) = sum_k p_k exp(theta A_k). FiniteSupport only.
SymMatrix exact_mgf(const EnsembleSpec& spec, double theta);

// Martingale moments are estimated with `trials` paths from `seed`.
EnsembleParams ensemble_params(const EnsembleSpec& spec, std::uint64_t trials = 20000,
                               std::uint64_t seed = 0x5eed);

struct SumOutcome {
  SymMatrix value;
  double probability;
};
inline constexpr double kMaxOutcomes = 1e7;
// Exact law of S_n for a FiniteSupport spec. Needs k^n <= 1e7.
std::vector<SumOutcome> enumerate_sum_distribution(const EnsembleSpec& spec);

struct MartingalePath {
  SymMatrix sum;        // S_n
  SymMatrix variation;  // W_n = sum_i E_{i-1} X_i^2
};
MartingalePath sample_martingale_path(const EnsembleSpec& spec, std::uint64_t seed,
                                      std::uint64_t trial);

struct MartingaleOutcome {
  SymMatrix sum;
  SymMatrix variation;
  double probability;
};
// Every sign pattern of a MartingaleAdapted spec. Needs 2^n <= 1e7.
std::vector<MartingaleOutcome> enumerate_martingale_paths(const EnsembleSpec& spec);

// Orlicz psi_1 norm of scalar distributions.
struct ConstantDist {
  double value;
};
struct ExponentialDist {
  double rate;
};
struct DiscreteDist {
  std::vector<std::pair<double, double>> atoms;  // (value, probability)
};
// Pareto(shape, scale): no exponential moment of any order.
struct ParetoDist {
  double shape;
  double scale;
};
using ScalarDist = std::variant<ConstantDist, ExponentialDist, DiscreteDist, ParetoDist>;

// inf{C > 0 : E exp(|xi| / C) <= 2}, by bisection to relative 1e-9.
double orlicz_psi1_norm(const ScalarDist& dist);

}  // namespace mbern

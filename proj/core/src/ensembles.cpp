#include "mbern/ensembles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "mbern/errors.hpp"
#include "mbern/rng.hpp"

namespace mbern {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 5> kFamilyNames{{
    {Family::FixedBasisRademacher, "FixedBasisRademacher"},
    {Family::RankOneSphere, "RankOneSphere"},
    {Family::FiniteSupport, "FiniteSupport"},
    {Family::SubExpScaled, "SubExpScaled"},
    {Family::MartingaleAdapted, "MartingaleAdapted"},
}};

constexpr double kNormCapTol = 1e-12;

void require_norm_cap(const SymMatrix& b, const char* what) {
  if (op_norm(b) > 1.0 + kNormCapTol) {
    throw InvalidSpec(std::string(what) + " must have operator norm <= 1");
  }
}

void require_length(Index n) {
  if (n < 1) throw InvalidSpec("sequence length n must be >= 1");
}

std::uint32_t step_index(Index i) { return static_cast<std::uint32_t>(i); }

Vector sphere_point(CounterStream& rng, Index d) {
  Vector u(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index k = 0; k < d; ++k) u(k) = rng.normal();
    norm = u.norm();
  }
  return u / norm;
}

std::size_t pick_atom(const std::vector<Atom>& atoms, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (atoms[k].probability <= 0.0) continue;
    cumulative += atoms[k].probability;
    last_positive = k;
    if (u < cumulative) return k;
  }
  return last_positive;
}

double martingale_gain(const Matrix& partial_sum) {
  return 1.0 / (1.0 + op_norm(SymMatrix::symmetrized(partial_sum)));
}

// Calls visit(i, X_i) for each summand of one trial.
template <class Visit>
void generate(const EnsembleSpec& spec, std::uint64_t seed, std::uint64_t trial, Visit&& visit) {
  const Index d = spec.dim();
  const Index n = spec.length();
  switch (spec.family()) {
    case Family::FixedBasisRademacher: {
      const auto& p = std::get<RademacherParams>(spec.params());
      for (Index i = 0; i < n; ++i) {
        CounterStream rng(seed, trial, step_index(i));
        visit(i, Matrix(rng.sign() * p.basis[static_cast<std::size_t>(i)].entries()));
      }
      break;
    }
    case Family::RankOneSphere: {
      const Matrix centre = Matrix::Identity(d, d) / static_cast<double>(d);
      for (Index i = 0; i < n; ++i) {
        CounterStream rng(seed, trial, step_index(i));
        const Vector u = sphere_point(rng, d);
        visit(i, Matrix(u * u.transpose() - centre));
      }
      break;
    }
    case Family::FiniteSupport: {
      const auto& p = std::get<FiniteSupportParams>(spec.params());
      for (Index i = 0; i < n; ++i) {
        CounterStream rng(seed, trial, step_index(i));
        visit(i, p.atoms[pick_atom(p.atoms, rng.uniform())].value.entries());
      }
      break;
    }
    case Family::SubExpScaled: {
      const auto& p = std::get<SubExpParams>(spec.params());
      for (Index i = 0; i < n; ++i) {
        CounterStream rng(seed, trial, step_index(i));
        const double eps = rng.sign();
        visit(i, Matrix(eps * rng.exponential() * p.scale.entries()));
      }
      break;
    }
    case Family::MartingaleAdapted: {
      const auto& p = std::get<MartingaleParams>(spec.params());
      Matrix partial = Matrix::Zero(d, d);
      for (Index i = 0; i < n; ++i) {
        CounterStream rng(seed, trial, step_index(i));
        const Matrix x = rng.sign() * martingale_gain(partial) * p.direction.entries();
        partial += x;
        visit(i, x);
      }
      break;
    }
  }
}

}  // namespace

std::string_view to_string(Family f) {
  for (const auto& [family, name] : kFamilyNames) {
    if (family == f) return name;
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (const auto& [family, n] : kFamilyNames) {
    if (n == name) return family;
  }
  throw InvalidSpec("unknown ensemble family '" + std::string(name) + "'");
}

EnsembleSpec EnsembleSpec::rademacher(std::vector<SymMatrix> basis) {
  if (basis.empty()) throw InvalidSpec("Rademacher basis must be non-empty");
  const Index d = basis.front().dim();
  for (const auto& b : basis) {
    if (b.dim() != d) throw InvalidSpec("Rademacher basis matrices differ in dimension");
    require_norm_cap(b, "Rademacher basis matrices");
  }
  const auto n = static_cast<Index>(basis.size());
  return {Family::FixedBasisRademacher, d, n, RademacherParams{std::move(basis)}};
}

EnsembleSpec EnsembleSpec::rank_one_sphere(Index d, Index n) {
  if (d < 1) throw InvalidSpec("dimension must be >= 1");
  require_length(n);
  return {Family::RankOneSphere, d, n, SphereParams{}};
}

EnsembleSpec EnsembleSpec::finite_support(std::vector<Atom> atoms, Index n) {
  require_length(n);
  if (atoms.empty()) throw InvalidSpec("atom list must be non-empty");
  const Index d = atoms.front().value.dim();
  double total = 0.0;
  double scale = 1.0;
  Matrix mean = Matrix::Zero(d, d);
  for (const auto& a : atoms) {
    if (a.value.dim() != d) throw InvalidSpec("atoms differ in dimension");
    if (!(a.probability >= 0.0) || !std::isfinite(a.probability)) {
      throw InvalidSpec("atom probabilities must be nonnegative");
    }
    total += a.probability;
    mean += a.probability * a.value.entries();
    scale = std::max(scale, a.value.entries().cwiseAbs().maxCoeff());
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidSpec("atom probabilities must sum to 1");
  if (mean.cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvalidSpec("atom list must have mean 0");
  return {Family::FiniteSupport, d, n, FiniteSupportParams{std::move(atoms)}};
}

EnsembleSpec EnsembleSpec::subexp_scaled(SymMatrix b, Index n) {
  require_length(n);
  require_norm_cap(b, "SubExpScaled direction");
  const Index d = b.dim();
  return {Family::SubExpScaled, d, n, SubExpParams{std::move(b)}};
}

EnsembleSpec EnsembleSpec::martingale_adapted(SymMatrix b, Index n) {
  require_length(n);
  require_norm_cap(b, "MartingaleAdapted direction");
  const Index d = b.dim();
  return {Family::MartingaleAdapted, d, n, MartingaleParams{std::move(b)}};
}

std::vector<SymMatrix> sample(const EnsembleSpec& spec, std::uint64_t seed, std::uint64_t trial) {
  std::vector<SymMatrix> out;
  out.reserve(static_cast<std::size_t>(spec.length()));
  generate(spec, seed, trial,
           [&](Index, const Matrix& x) { out.push_back(SymMatrix::symmetrized(x)); });
  return out;
}

Matrix sample_sum(const EnsembleSpec& spec, std::uint64_t seed, std::uint64_t trial) {
  Matrix s = Matrix::Zero(spec.dim(), spec.dim());
  generate(spec, seed, trial, [&](Index, const Matrix& x) { s += x; });
  return s;
}

Vector sample_vector_sum(const SphereVectorSpec& spec, std::uint64_t seed, std::uint64_t trial) {
  Vector s = Vector::Zero(spec.d);
  for (Index i = 0; i < spec.n; ++i) {
    CounterStream rng(seed, trial, step_index(i));
    s += sphere_point(rng, spec.d);
  }
  return s;
}

SymMatrix exact_variance(const EnsembleSpec& spec) {
  const Index d = spec.dim();
  const auto n = static_cast<double>(spec.length());
  switch (spec.family()) {
    case Family::FixedBasisRademacher: {
      SymMatrix v = SymMatrix::zero(d);
      for (const auto& b : std::get<RademacherParams>(spec.params()).basis) v = v + b.squared();
      return v;
    }
    case Family::RankOneSphere: {
      // E (uu^T - I/d)^2 = E uu^T (1 - 2/d) + I/d^2 = (d - 1)/d^2 I.
      const auto dd = static_cast<double>(d);
      return SymMatrix::identity(d) * (n * (dd - 1.0) / (dd * dd));
    }
    case Family::FiniteSupport: {
      SymMatrix v = SymMatrix::zero(d);
      for (const auto& a : std::get<FiniteSupportParams>(spec.params()).atoms) {
        v = v + a.value.squared() * a.probability;
      }
      return v * n;
    }
    case Family::SubExpScaled:
      // E (eps E)^2 = E E^2 = 2 for a rate-1 exponential.
      return std::get<SubExpParams>(spec.params()).scale.squared() * (2.0 * n);
    case Family::MartingaleAdapted:
      break;
  }
  throw NotExact("no closed-form variance for family " + std::string(to_string(spec.family())));
}

VarianceEstimate estimate_variance(const EnsembleSpec& spec, std::uint64_t trials,
                                   std::uint64_t seed) {
  if (trials < 2) throw InvalidSpec("variance estimate needs at least 2 trials");
  const Index d = spec.dim();
  Matrix sum = Matrix::Zero(d, d);
  Matrix sum_sq = Matrix::Zero(d, d);
  Matrix q(d, d);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    q.setZero();
    generate(spec, seed, trial, [&](Index, const Matrix& x) { q.noalias() += x * x; });
    sum += q;
    sum_sq += q.cwiseProduct(q);
  }
  const auto t = static_cast<double>(trials);
  const Matrix mean = sum / t;
  const Matrix var = ((sum_sq / t - mean.cwiseProduct(mean)) * (t / (t - 1.0))).cwiseMax(0.0);
  return {SymMatrix::symmetrized(mean), (var / t).cwiseSqrt(), trials};
}

SymMatrix exact_mgf(const EnsembleSpec& spec, double theta) {
  if (spec.family() != Family::FiniteSupport) {
    throw NotExact("exact_mgf needs a FiniteSupport ensemble");
  }
  SymMatrix m = SymMatrix::zero(spec.dim());
  for (const auto& a : std::get<FiniteSupportParams>(spec.params()).atoms) {
    if (a.probability == 0.0) continue;
    m = m + matrix_exp(a.value * theta) * a.probability;
  }
  return m;
}

EnsembleParams ensemble_params(const EnsembleSpec& spec, std::uint64_t trials,
                               std::uint64_t seed) {
  EnsembleParams out;
  SymMatrix variance = SymMatrix::zero(spec.dim());
  if (spec.family() == Family::MartingaleAdapted) {
    variance = estimate_variance(spec, trials, seed).mean;
    out.exact = false;
    out.sample_size = trials;
  } else {
    variance = exact_variance(spec);
  }
  out.sigma2 = op_norm(variance);
  out.trace_var = variance.trace();

  switch (spec.family()) {
    case Family::FixedBasisRademacher:
      for (const auto& b : std::get<RademacherParams>(spec.params()).basis) {
        out.U = std::max(out.U, op_norm(b));
      }
      break;
    case Family::RankOneSphere: {
      // Spectrum of uu^T - I/d is {1 - 1/d, -1/d, ..., -1/d}.
      const auto dd = static_cast<double>(spec.dim());
      out.U = spec.dim() >= 2 ? std::max(1.0 - 1.0 / dd, 1.0 / dd) : 1.0;
      break;
    }
    case Family::FiniteSupport:
      for (const auto& a : std::get<FiniteSupportParams>(spec.params()).atoms) {
        if (a.probability > 0.0) out.U = std::max(out.U, op_norm(a.value));
      }
      break;
    case Family::SubExpScaled: {
      // ||X_i|| = E_i ||B||; its psi_1 norm is ||B|| times that of Exponential(1).
      const double b_norm = op_norm(std::get<SubExpParams>(spec.params()).scale);
      out.U = 2.0 * orlicz_psi1_norm(ExponentialDist{1.0}) * b_norm;
      break;
    }
    case Family::MartingaleAdapted:
      out.U = op_norm(std::get<MartingaleParams>(spec.params()).direction);
      break;
  }

  if (out.sigma2 <= 1e-300 || out.U <= 0.0) {
    out.degenerate = true;
    out.sigma2 = 0.0;
    out.trace_var = 0.0;
    out.intdim = 0.0;
    if (out.U <= 0.0) out.U = 1.0;
    return out;
  }
  out.intdim = std::max(1.0, out.trace_var / out.sigma2);
  return out;
}

std::vector<SumOutcome> enumerate_sum_distribution(const EnsembleSpec& spec) {
  if (spec.family() != Family::FiniteSupport) {
    throw NotExact("enumeration needs a FiniteSupport ensemble");
  }
  const auto& atoms = std::get<FiniteSupportParams>(spec.params()).atoms;
  const Index n = spec.length();
  const double outcomes = std::pow(static_cast<double>(atoms.size()), static_cast<double>(n));
  if (outcomes > kMaxOutcomes) {
    throw OutcomeExplosion("k^n = " + std::to_string(outcomes) + " exceeds 1e7 outcomes");
  }

  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (atoms[k].probability > 0.0) live.push_back(k);
  }

  // S_n depends only on how many times each atom is drawn, so walk the
  // compositions of n and weight each by its multinomial probability.
  std::vector<SumOutcome> out;
  std::vector<Index> counts(live.size(), 0);
  const Index d = spec.dim();
  auto emit = [&] {
    Matrix value = Matrix::Zero(d, d);
    double prob = 1.0;
    Index remaining = n;
    for (std::size_t j = 0; j < live.size(); ++j) {
      const Atom& a = atoms[live[j]];
      // binomial(remaining, counts[j]) accumulated multiplicatively stays exact here.
      double binom = 1.0;
      for (Index r = 0; r < counts[j]; ++r) {
        binom = binom * static_cast<double>(remaining - r) / static_cast<double>(r + 1);
      }
      remaining -= counts[j];
      prob *= binom * std::pow(a.probability, static_cast<double>(counts[j]));
      value += static_cast<double>(counts[j]) * a.value.entries();
    }
    out.push_back({SymMatrix::symmetrized(value), prob});
  };
  auto recurse = [&](auto&& self, std::size_t j, Index left) -> void {
    if (j + 1 == live.size()) {
      counts[j] = left;
      emit();
      return;
    }
    for (Index c = left; c >= 0; --c) {
      counts[j] = c;
      self(self, j + 1, left - c);
    }
  };
  recurse(recurse, 0, n);
  return out;
}

MartingalePath sample_martingale_path(const EnsembleSpec& spec, std::uint64_t seed,
                                      std::uint64_t trial) {
  if (spec.family() != Family::MartingaleAdapted) {
    throw InvalidSpec("sample_martingale_path needs a MartingaleAdapted ensemble");
  }
  const auto& b = std::get<MartingaleParams>(spec.params()).direction;
  const Matrix b2 = b.squared().entries();
  const Index d = spec.dim();
  Matrix s = Matrix::Zero(d, d);
  Matrix w = Matrix::Zero(d, d);
  for (Index i = 0; i < spec.length(); ++i) {
    CounterStream rng(seed, trial, step_index(i));
    const double c = martingale_gain(s);
    s += rng.sign() * c * b.entries();
    w += (c * c) * b2;
  }
  return {SymMatrix::symmetrized(s), SymMatrix::symmetrized(w)};
}

std::vector<MartingaleOutcome> enumerate_martingale_paths(const EnsembleSpec& spec) {
  if (spec.family() != Family::MartingaleAdapted) {
    throw InvalidSpec("path enumeration needs a MartingaleAdapted ensemble");
  }
  const Index n = spec.length();
  if (std::pow(2.0, static_cast<double>(n)) > kMaxOutcomes) {
    throw OutcomeExplosion("2^n paths exceed 1e7 outcomes");
  }
  const auto& b = std::get<MartingaleParams>(spec.params()).direction;
  const Matrix b2 = b.squared().entries();
  const double prob = std::pow(0.5, static_cast<double>(n));
  std::vector<MartingaleOutcome> out;
  out.reserve(static_cast<std::size_t>(1) << n);
  auto recurse = [&](auto&& self, Index i, const Matrix& s, const Matrix& w) -> void {
    if (i == n) {
      out.push_back({SymMatrix::symmetrized(s), SymMatrix::symmetrized(w), prob});
      return;
    }
    const double c = martingale_gain(s);
    const Matrix w_next = w + (c * c) * b2;
    self(self, i + 1, Matrix(s + c * b.entries()), w_next);
    self(self, i + 1, Matrix(s - c * b.entries()), w_next);
  };
  recurse(recurse, 0, Matrix::Zero(spec.dim(), spec.dim()), Matrix::Zero(spec.dim(), spec.dim()));
  return out;
}

}  // namespace mbern

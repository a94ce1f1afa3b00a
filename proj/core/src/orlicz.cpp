#include <cmath>
#include <limits>
#include <type_traits>

#include "mbern/ensembles.hpp"
#include "mbern/errors.hpp"

namespace mbern {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// E exp(|xi| / c), +inf when it diverges.
double exp_moment(const ScalarDist& dist, double c) {
  return std::visit(
      [c](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDist>) {
          return std::exp(std::abs(d.value) / c);
        } else if constexpr (std::is_same_v<T, ExponentialDist>) {
          const double s = 1.0 / c;
          return s < d.rate ? d.rate / (d.rate - s) : kInf;
        } else if constexpr (std::is_same_v<T, DiscreteDist>) {
          double m = 0.0;
          for (const auto& [value, p] : d.atoms) {
            if (p > 0.0) m += p * std::exp(std::abs(value) / c);
          }
          return m;
        } else {
          return kInf;
        }
      },
      dist);
}

// Typical magnitude of |xi|; 0 when xi = 0 almost surely.
double scale_of(const ScalarDist& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDist>) {
          return std::abs(d.value);
        } else if constexpr (std::is_same_v<T, ExponentialDist>) {
          if (!(d.rate > 0.0)) throw DomainError("exponential rate must be positive");
          return 1.0 / d.rate;
        } else if constexpr (std::is_same_v<T, DiscreteDist>) {
          double s = 0.0;
          for (const auto& [value, p] : d.atoms) {
            if (p > 0.0) s = std::max(s, std::abs(value));
          }
          return s;
        } else {
          return d.scale;
        }
      },
      dist);
}

}  // namespace

double orlicz_psi1_norm(const ScalarDist& dist) {
  if (std::holds_alternative<ParetoDist>(dist)) {
    throw NoFiniteNorm("Pareto tails have no finite exponential moment");
  }
  const double scale = scale_of(dist);
  if (scale == 0.0) return 0.0;

  double lo = 1e-9;
  double hi = 1e3 * scale;
  if (exp_moment(dist, hi) > 2.0) throw NoFiniteNorm("no finite psi_1 norm within bracket");
  if (exp_moment(dist, lo) <= 2.0) return lo;
  for (int iter = 0; iter < 200 && hi - lo > 1e-9 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (exp_moment(dist, mid) <= 2.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace mbern

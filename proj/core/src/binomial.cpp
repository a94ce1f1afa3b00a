#include "mbern/binomial.hpp"

#include <boost/math/special_functions/beta.hpp>

#include "mbern/errors.hpp"

namespace mbern {

ConfidenceInterval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double confidence) {
  if (trials == 0) throw DomainError("Clopper-Pearson interval needs trials > 0");
  if (hits > trials) throw DomainError("hits exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must be in (0, 1)");

  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(hits);
  const auto n = static_cast<double>(trials);
  ConfidenceInterval ci{0.0, 1.0};
  // Lower and upper limits are Beta quantiles of the hit count.
  if (hits > 0) ci.low = boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  if (hits < trials) ci.high = boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return ci;
}

}  // namespace mbern

#pragma once

#include <cstdint>

namespace mbern {

struct ConfidenceInterval {
  double low;
  double high;
};

// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
// `confidence` in (0, 1); trials > 0.
ConfidenceInterval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double confidence);

}  // namespace mbern

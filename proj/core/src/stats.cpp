#include "thpsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thpsim {

Estimate wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (successes > trials) {
    throw std::invalid_argument("successes exceed trials");
  }
  if (trials == 0) return {0.0, 0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {p, lo, hi};
}

}  // namespace thpsim

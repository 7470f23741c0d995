#pragma once

#include <cstdint>

namespace thpsim {

struct Estimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
/// With zero trials the estimate is 0 and the interval spans [0, 1].
Estimate wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

}  // namespace thpsim

// Writes the afterpulse histogram fixtures under data/fixtures.
//
// Each corrected fixture has 200 bins of 0.4 us whose dark tail (bins
// 100..199) and grand total are pinned so that the tail-level split gives
// the target (ApC, DC) exactly. The raw companion is the same histogram
// after first-click censoring with the trial count chosen to give the
// requested suppression in the last bin.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <numeric>
#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "thpsim/histogram.hpp"

namespace {

constexpr int kBins = 200;
constexpr int kTail = 100;
constexpr double kBinWidth = 0.4e-6;

struct Target {
  std::string name;
  long apc;
  long dc;
  double fast_share;  // share of afterpulse counts in the fast component
  double tau_fast_s;
  double tau_slow_s;
  double suppression;  // fraction lost in the last bin of the raw data
  unsigned seed;
};

std::vector<double> corrected_counts(const Target& t) {
  std::mt19937_64 rng(t.seed);
  std::vector<double> c(kBins, 0.0);

  // Dark tail: integers summing to dc * kTail / kBins.
  const long tail_sum = t.dc * kTail / kBins;
  const long base = tail_sum / kTail;
  const long extra = tail_sum - base * kTail;
  std::vector<int> order(kTail);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < kTail; ++i) c[kTail + i] = static_cast<double>(base);
  for (long i = 0; i < extra; ++i) c[kTail + order[i]] += 1.0;

  // Front: floor plus the two decays, Poisson-sampled, then pinned.
  const double floor = static_cast<double>(t.dc) / kBins;
  std::vector<double> shape(kTail);
  for (int i = 0; i < kTail; ++i) {
    const double a = (i + 0.5) * kBinWidth;
    shape[i] = t.fast_share * std::exp(-a / t.tau_fast_s) * (1 - std::exp(-kBinWidth / t.tau_fast_s)) +
               (1 - t.fast_share) * std::exp(-a / t.tau_slow_s) * (1 - std::exp(-kBinWidth / t.tau_slow_s));
  }
  const double norm = std::accumulate(shape.begin(), shape.end(), 0.0);
  for (int i = 0; i < kTail; ++i) {
    const double expected = floor + static_cast<double>(t.apc) * shape[i] / norm;
    std::poisson_distribution<long> pois(expected);
    c[i] = static_cast<double>(pois(rng));
  }
  const double front_target = static_cast<double>(t.apc + t.dc) - static_cast<double>(tail_sum);
  const double front = std::accumulate(c.begin(), c.begin() + kTail, 0.0);
  c[0] += front_target - front;
  return c;
}

// Forward censoring: raw_i = c_i * (1 - sum_{j<i} raw_j / trials).
std::vector<double> censor(const std::vector<double>& c, double trials) {
  std::vector<double> raw(c.size());
  double seen = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    raw[i] = c[i] * (1.0 - seen / trials);
    seen += raw[i];
  }
  return raw;
}

double trials_for(const std::vector<double>& c, double suppression) {
  // The loss in the last bin is seen/trials; solve by bisection on log trials.
  double lo = std::log(1.0), hi = std::log(1e12);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double n = std::exp(mid);
    const auto raw = censor(c, n);
    const double seen = std::accumulate(raw.begin(), raw.end() - 1, 0.0);
    (seen / n > suppression ? lo : hi) = mid;
  }
  return std::round(std::exp(0.5 * (lo + hi)));
}

void write(const std::string& path, const thpsim::CountHistogram& h) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  thpsim::write_histogram_csv(f, h);
  std::cout << path << ": total " << h.total() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data/fixtures";
  const Target targets[] = {
      {"afterpulse_1536", 867760, 162854, 0.8, 1.0e-6, 4.0e-6, 0.064, 1536},
      {"afterpulse_1924", 44981, 962140, 0.8, 1.0e-6, 4.0e-6, 0.010, 1924},
  };
  try {
    for (const auto& t : targets) {
      thpsim::CountHistogram h;
      h.bin_width_s = kBinWidth;
      h.counts = corrected_counts(t);
      write(dir + "/" + t.name + ".csv", h);

      // Rounded so the "# trials" line written at 6 digits is exact.
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", trials_for(h.counts, t.suppression));
      const double n = std::stod(buf);
      thpsim::CountHistogram raw = h;
      raw.counts = censor(h.counts, n);
      for (double& x : raw.counts) x = std::round(x);
      raw.trials = n;
      write(dir + "/" + t.name + "_raw.csv", raw);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "thpsim/histogram.hpp"

namespace thpsim {

struct DecayComponent {
  double amplitude = 0.0;  // counts per bin at t = 0
  double lifetime_s = 0.0;
};

// counts(t) = floor + sum_k amplitude_k * exp(-t / lifetime_k), t at bin centres.
struct DecayFit {
  double floor = 0.0;
  std::array<DecayComponent, 2> components{};  // sorted by lifetime
  std::vector<double> residuals;               // data - model, per bin
  double chi2 = 0.0;                           // Poisson-weighted
  double rms_residual = 0.0;
  bool converged = false;
  // No usable decay signal (flat input, or amplitudes vanish).
  bool degenerate = false;

  double model(double t) const;
};

/// Weighted least-squares fit of a two-lifetime decay on a constant floor.
/// Lifetimes are seeded from a log-spaced grid with amplitudes solved
/// linearly, then refined with Levenberg-Marquardt.
DecayFit fit_two_exponential(const CountHistogram& hist, std::size_t first_bin = 0);

}  // namespace thpsim

#include "thpsim/phase_readout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thpsim {

void ModulatorResponse::validate() const {
  if (!(v_half_signal > 0.0) || !(v_half_attack > 0.0)) {
    throw std::invalid_argument("modulator half-wave voltages must be > 0");
  }
  if (passes != 1 && passes != 2) {
    throw std::invalid_argument("modulator passes must be 1 or 2");
  }
}

double separation_angle(const ModulatorResponse& resp) {
  resp.validate();
  const double theta =
      resp.passes * (resp.v_half_signal / resp.v_half_attack) * std::numbers::pi / 2.0;
  // Allow round-off at exactly pi (two passes at equal voltages).
  if (theta > std::numbers::pi * (1.0 + 1e-12)) {
    throw std::domain_error("separation angle exceeds pi for this voltage ratio");
  }
  return std::min(theta, std::numbers::pi);
}

double nu_factor(double theta_s, double theta_l) {
  if (!(theta_l > 0.0)) {
    throw std::domain_error("theta_l must be > 0: identical states cannot be told apart");
  }
  return (1.0 - std::cos(theta_s)) / (1.0 - std::cos(theta_l));
}

double state_distance_sq(const CoherentPair& pair) {
  const double s = std::sin(pair.theta / 2.0);
  return 4.0 * pair.mu * s * s;
}

double readout_error_prob(const CoherentPair& pair, double excess_noise) {
  if (!(excess_noise > 0.0)) {
    throw std::invalid_argument("excess noise multiplier must be > 0");
  }
  if (pair.mu <= 0.0) return 0.5;
  const double sigma = 0.5 * std::sqrt(excess_noise);
  const double distance = 2.0 * std::sqrt(pair.mu) * std::abs(std::sin(pair.theta / 2.0));
  return 0.5 * std::erfc(distance / (2.0 * sigma * std::numbers::sqrt2));
}

double required_mu(double theta, double target_err, double excess_noise) {
  if (!(theta > 0.0)) {
    throw std::domain_error("theta must be > 0");
  }
  if (!(target_err > 0.0 && target_err < 0.5)) {
    throw std::invalid_argument("target error must lie in (0, 0.5)");
  }
  auto err = [&](double mu) {
    return readout_error_prob({mu, theta}, excess_noise);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (err(hi) > target_err) {
    hi *= 2.0;
    if (hi > 1e300) throw std::domain_error("target error unreachable");
  }
  while ((hi - lo) > 1e-7 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (err(mid) > target_err) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace thpsim

#include "thpsim/detector_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thpsim {

void DetectorParams::validate() const {
  auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!is_prob(efficiency) || !is_prob(dark_prob)) {
    throw std::invalid_argument("detector efficiency and dark probability must lie in [0, 1]");
  }
  if (!(gate_period_s > 0.0)) {
    throw std::invalid_argument("gate period must be > 0");
  }
  if (deadtime_gates < 0) {
    throw std::invalid_argument("deadtime must be >= 0 gates");
  }
  if (!(afterpulse_scale >= 0.0)) {
    throw std::invalid_argument("afterpulse scale must be >= 0");
  }
  for (const auto& trap : traps) {
    if (!(trap.amplitude >= 0.0) || !(trap.lifetime_s > 0.0)) {
      throw std::invalid_argument("trap amplitudes must be >= 0 and lifetimes > 0");
    }
  }
}

std::vector<TrapComponent> calibrated_traps() {
  // Fast component dominates the first gates; the slow one is the tail that
  // survives a 10 us deadtime.
  return {{1.6e-7, 0.5e-6}, {2.0e-10, 10e-6}};
}

DetectorParams default_detector() {
  DetectorParams p;
  p.traps = calibrated_traps();
  return p;
}

double afterpulse_prob_unclamped(const DetectorParams& params, double t_since_thp,
                                 double thp_photons) {
  if (t_since_thp < 0.0) {
    throw std::invalid_argument("time since THP must be >= 0");
  }
  double sum = 0.0;
  for (const auto& trap : params.traps) {
    sum += trap.amplitude * std::exp(-t_since_thp / trap.lifetime_s);
  }
  return params.afterpulse_scale * thp_photons * sum;
}

double afterpulse_prob(const DetectorParams& params, double t_since_thp,
                       double thp_photons) {
  return std::min(1.0, afterpulse_prob_unclamped(params, t_since_thp, thp_photons));
}

double cumulative_afterpulse_prob(const DetectorParams& params, double thp_photons,
                                  int n_gates) {
  double none = 1.0;
  for (int g = 1; g <= n_gates; ++g) {
    none *= 1.0 - afterpulse_prob(params, g * params.gate_period_s, thp_photons);
  }
  return 1.0 - none;
}

double gamma_factor(double apc_s, double dc_s, double mu_s, double apc_l, double dc_l,
                    double mu_l) {
  if (!(apc_s > 0.0) || !(dc_s > 0.0) || !(mu_s > 0.0) || !(dc_l > 0.0) ||
      !(mu_l > 0.0) || apc_l < 0.0) {
    throw std::invalid_argument(
        "gamma needs positive counts and photon numbers (ApC_l may be 0)");
  }
  return (mu_s / mu_l) * (apc_l / dc_l) / (apc_s / dc_s);
}

DeltaFactors delta_factors(double rho, double nu, double gamma,
                           const WavelengthProfile& profile_s,
                           const WavelengthProfile& profile_l) {
  for (const auto* p : {&profile_s, &profile_l}) {
    for (auto seg : {segment::kXD0, segment::kXCD1}) {
      if (!p->has(seg)) {
        throw std::invalid_argument("profile '" + p->name + "' lacks segment '" +
                                    std::string(seg) + "'");
      }
    }
  }
  const double delta0 = rho * nu * gamma;
  const double exponent_db = profile_s.loss(segment::kXCD1) - profile_s.loss(segment::kXD0) -
                             profile_l.loss(segment::kXCD1) + profile_l.loss(segment::kXD0);
  return {delta0, delta0 * std::pow(10.0, exponent_db / 10.0)};
}

double gate_click_prob(const DetectorParams& params, double in_gate_mean_photons,
                       double afterpulse_hazard) {
  const double hazard = std::clamp(afterpulse_hazard, 0.0, 1.0);
  return 1.0 - (1.0 - params.dark_prob) * (1.0 - hazard) *
                   std::exp(-in_gate_mean_photons * params.efficiency);
}

GateSample sample_gate(const DetectorParams& params, double in_gate_mean_photons,
                       double afterpulse_hazard, RngStream& rng) {
  const double p_signal = -std::expm1(-in_gate_mean_photons * params.efficiency);
  // Three draws per gate regardless of outcome keep streams aligned.
  const bool signal = rng.uniform() < p_signal;
  const bool afterpulse = rng.uniform() < afterpulse_hazard;
  const bool dark = rng.uniform() < params.dark_prob;
  if (signal) return {true, ClickCause::signal};
  if (afterpulse) return {true, ClickCause::afterpulse};
  if (dark) return {true, ClickCause::dark};
  return {};
}

}  // namespace thpsim

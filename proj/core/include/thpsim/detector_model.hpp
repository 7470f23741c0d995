#pragma once

#include <vector>

#include "thpsim/optics_budget.hpp"
#include "thpsim/rng.hpp"

namespace thpsim {

// One population of trapped carriers: per-THP-photon click probability
// contribution at release time zero, and its release lifetime.
struct TrapComponent {
  double amplitude = 0.0;  // per photon at the receiver entrance
  double lifetime_s = 0.0;
};

// Gated InGaAs single-photon detector.
struct DetectorParams {
  double efficiency = 0.10;
  double dark_prob = 5e-5;        // per gate
  double gate_period_s = 200e-9;  // one gate per slot
  int deadtime_gates = 50;
  std::vector<TrapComponent> traps;
  double afterpulse_scale = 1.0;  // delta; 1 at the signal wavelength

  void validate() const;
};

/// Calibrated two-lifetime trap model at the signal wavelength. The
/// amplitudes are not measured values: they are set so that a bright THP
/// (kReferenceThpPhotons) gives >= 40% cumulative afterpulse probability in
/// the first five gates, and the profile reaches the dark floor by ~40 us.
std::vector<TrapComponent> calibrated_traps();

/// Default detector with calibrated traps.
DetectorParams default_detector();

// Attack-brightness photon number at the receiver entrance for the
// signal-wavelength attack; used as the "bright THP" reference.
inline constexpr double kReferenceThpPhotons = 2e6;

/// Afterpulse probability at a gate t_since_thp after a THP, clamped to 1.
double afterpulse_prob(const DetectorParams& params, double t_since_thp,
                       double thp_photons);

/// Same quantity without the clamp; linear in thp_photons.
double afterpulse_prob_unclamped(const DetectorParams& params, double t_since_thp,
                                 double thp_photons);

/// Probability of at least one afterpulse in gates 1..n_gates after a THP
/// arriving at gate 0 (deadtime ignored).
double cumulative_afterpulse_prob(const DetectorParams& params, double thp_photons,
                                  int n_gates);

/// Photon-normalised afterpulse-to-dark ratio between the two wavelengths.
double gamma_factor(double apc_s, double dc_s, double mu_s, double apc_l, double dc_l,
                    double mu_l);

struct DeltaFactors {
  double delta0 = 0.0;
  double delta1 = 0.0;
};

/// delta0 = rho * nu * gamma; delta1 corrects delta0 for the different
/// entrance-to-detector losses of D0 and D1 at the two wavelengths.
DeltaFactors delta_factors(double rho, double nu, double gamma,
                           const WavelengthProfile& profile_s,
                           const WavelengthProfile& profile_l);

enum class ClickCause { none, signal, dark, afterpulse };

struct GateSample {
  bool click = false;
  ClickCause cause = ClickCause::none;
};

/// One gate of one detector. Click probability is
/// 1 - (1 - dark)(1 - hazard) exp(-mu * eta). When several processes fire the
/// cause is attributed to the signal first, then to afterpulsing.
GateSample sample_gate(const DetectorParams& params, double in_gate_mean_photons,
                       double afterpulse_hazard, RngStream& rng);

/// Exact click probability of sample_gate.
double gate_click_prob(const DetectorParams& params, double in_gate_mean_photons,
                       double afterpulse_hazard);

}  // namespace thpsim

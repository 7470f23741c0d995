#pragma once

#include <numbers>

namespace thpsim {

// Phase modulator as seen by a probe at two wavelengths. Bob's choices are
// phi_B in {0, pi/2} at the signal wavelength.
struct ModulatorResponse {
  double v_half_signal = 0.0;  // V, pi/2 voltage at the signal wavelength
  double v_half_attack = 0.0;  // V, pi/2 voltage at the probe wavelength
  int passes = 1;              // probe passes through the modulator

  void validate() const;
};

// Two back-reflected coherent states of equal amplitude.
struct CoherentPair {
  double mu = 0.0;     // |alpha|^2 = |beta|^2
  double theta = 0.0;  // angle between alpha and beta, rad
};

/// Angle between the probe's two possible output states under a linear
/// modulator response. Throws std::domain_error above pi.
double separation_angle(const ModulatorResponse& resp);

/// Brightness factor that restores |alpha - beta|^2 when the separation
/// angle shrinks from theta_s to theta_l.
double nu_factor(double theta_s, double theta_l);

/// Squared distance |alpha - beta|^2 = 4 mu sin^2(theta/2).
double state_distance_sq(const CoherentPair& pair);

/// Error probability of a homodyne measurement along the alpha-beta axis
/// with a midpoint threshold. Quadrature standard deviation is 1/2 times
/// sqrt(excess_noise); excess_noise = 1 is the shot-noise limit.
double readout_error_prob(const CoherentPair& pair, double excess_noise = 1.0);

/// Smallest mean photon number reaching target_err at angle theta, found by
/// bisection to 1e-7 relative.
double required_mu(double theta, double target_err, double excess_noise = 1.0);

}  // namespace thpsim

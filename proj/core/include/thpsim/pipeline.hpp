#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thpsim/config.hpp"

namespace thpsim {

struct BudgetLine {
  std::string label;
  std::string profile;
  double loss_db = 0.0;
};

struct BudgetReport {
  std::vector<BudgetLine> lines;
  std::optional<double> double_pass_signal;
  std::optional<double> double_pass_attack;
  std::optional<double> circulator_best;
  std::optional<double> circulator_worst;
  std::optional<double> circulator_midway;
  std::optional<double> rho;
  std::optional<double> mu_at_z;            // from the power measurement
  std::optional<double> mu_at_x;            // from photon counting
  std::optional<double> measured_zcx_loss;  // 10 log10(mu_z / mu_x)
  std::vector<std::string> notices;
};

/// Path losses, the polarization midpoint and rho. Missing segments throw
/// std::out_of_range naming the segment.
BudgetReport compute_budget(const Config& cfg);

struct Factor {
  double value = 0.0;
  std::string provenance;
};

struct Factors {
  Factor theta_s;
  Factor theta_l;
  Factor rho;
  Factor nu;
  Factor gamma;
  Factor delta0;
  Factor delta1;
};

/// theta_l, nu, gamma, delta0 and delta1 from the profiles, modulator
/// voltages and afterpulse counts. Throws ConfigError if an input is absent.
Factors compute_factors(const Config& cfg);

enum class AttackWavelength { signal, attack };

/// Detector pair with afterpulse scales for the chosen probe wavelength.
std::pair<DetectorParams, DetectorParams> detectors_for(const Config& cfg, AttackWavelength wl);

/// Attack combination from the config, or the reference combination, with
/// the readout angle filled in for the chosen wavelength.
AttackCombination combination_for(const Config& cfg, AttackWavelength wl);

/// The configured grid (or the single combination) with the readout angle
/// and readout brightness adjusted the same way as combination_for.
ParameterGrid grid_for(const Config& cfg, AttackWavelength wl);

}  // namespace thpsim

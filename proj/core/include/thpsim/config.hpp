#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "thpsim/attack_engine.hpp"
#include "thpsim/detector_model.hpp"
#include "thpsim/optics_budget.hpp"
#include "thpsim/protocol_sim.hpp"

namespace thpsim {

// Error in a configuration file; what() names the line or the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerMeasurement {
  double avg_power_w = 0.0;
  double rep_rate_hz = 0.0;
};

// Counts behind the afterpulse comparison at one wavelength.
struct AfterpulseCounts {
  double thp_mu = 0.0;
  double apc = 0.0;
  double dc = 0.0;
};

struct Config {
  std::optional<WavelengthProfile> signal;  // the QKD wavelength
  std::optional<WavelengthProfile> attack;  // the long probe wavelength

  // Photon-counting measurement of the circulator path at the attack
  // wavelength (power at Z, counts at X).
  std::optional<PowerMeasurement> power_at_z;
  std::optional<PhotonCountRecord> counts_at_x;

  std::optional<AfterpulseCounts> afterpulse_signal;
  std::optional<AfterpulseCounts> afterpulse_attack;

  int passes_signal = 2;
  int passes_attack = 1;
  double excess_noise = 1.0;

  DetectorParams d0 = default_detector();
  DetectorParams d1 = default_detector();
  // Explicit afterpulse scales; when absent they come from the factor
  // pipeline (attack wavelength) or are 1 (signal wavelength).
  std::optional<double> delta0_override;
  std::optional<double> delta1_override;

  FrameConfig frame;
  double i_est = 0.506;
  std::optional<AttackCombination> combination;  // readout_theta < 0 = derive
  std::uint64_t frames = 10000;
  std::uint64_t seed = 1;

  std::optional<ParameterGrid> grid;
  std::optional<double> rate_tolerance = 0.05;
  std::optional<std::size_t> budget;
};

/// Parses a JSON configuration. Unknown keys are rejected so typos surface.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

}  // namespace thpsim

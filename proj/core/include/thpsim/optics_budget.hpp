#pragma once

#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thpsim {

// Physical constants, CODATA values truncated to 6 significant digits.
inline constexpr double kPlanck = 6.62607e-34;      // J s
inline constexpr double kSpeedOfLight = 2.99792e8;  // m/s

// Receiver path segments. Names follow the loss table of the receiver
// (ASCII hyphen and '*' for the reflection point).
namespace segment {
inline constexpr std::string_view kXY = "X-Y";
inline constexpr std::string_view kYZ = "Y-Z";
inline constexpr std::string_view kZStar = "Z*";
inline constexpr std::string_view kZCXBest = "Z-C*-X(best)";
inline constexpr std::string_view kZCXWorst = "Z-C*-X(worst)";
inline constexpr std::string_view kXD0 = "X-D0";
inline constexpr std::string_view kXCD1 = "X-C-D1";
}  // namespace segment

/// Normalizes a segment name: en/em dashes become '-', the black star
/// becomes '*', surrounding whitespace is removed.
std::string normalize_segment_name(std::string_view name);

/// Optical losses of the receiver at a single wavelength.
struct WavelengthProfile {
  std::string name;
  double wavelength_nm = 0.0;
  std::map<std::string, double, std::less<>> path_losses_db;
  double v_half = 0.0;  // modulator voltage for a pi/2 phase shift
  // Set when the Z* reflection loss was not measured at this wavelength
  // but copied from another one.
  bool reflection_borrowed = false;
  std::string reflection_note;
  // Fiber loss at this wavelength; kept for reference, not part of any
  // default path.
  double fiber_loss_db_per_km = 0.0;

  bool has(std::string_view seg) const;
  double loss(std::string_view seg) const;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct PhotonCountRecord {
  double pulses_sent = 0.0;
  double clicks = 0.0;
  double dark_clicks = 0.0;
  double detector_efficiency = 0.0;
};

double db_to_transmittance(double loss_db);
double transmittance_to_db(double transmittance);

/// Mean photon number per pulse of a pulsed source.
double mean_photons_per_pulse(double avg_power_w, double rep_rate_hz,
                              double wavelength_m);

/// Inverts (n-d)/N = 1 - exp(-mu*eta) exactly. For small click fractions
/// the result approaches the linear estimate (n-d)/(N*eta).
double estimate_mu_from_counts(const PhotonCountRecord& rec);
double estimate_mu_linear(const PhotonCountRecord& rec);

/// Sum of segment losses along a path; a segment traversed twice counts
/// twice.
double path_loss(const WavelengthProfile& profile,
                 std::span<const std::string> path);
double path_loss(const WavelengthProfile& profile,
                 std::initializer_list<std::string_view> path);

/// Loss seen by light in a polarization midway between the best and the
/// worst case, averaged over transmitted power (85.0 and 92.4 dB give
/// 87.28 dB).
double midway_polarization_loss(double best_db, double worst_db);

/// 10^((loss_l - loss_s)/10): how many more photons the attack needs at the
/// lossier wavelength.
double rho_factor(double loss_l_db, double loss_s_db);

// Canonical attack paths.
std::vector<std::string> double_pass_path();      // X-Y, Y-Z, Z*, Y-Z, X-Y
std::vector<std::string> circulator_path_best();  // X-Y, Y-Z, Z-C*-X(best)
std::vector<std::string> circulator_path_worst();

}  // namespace thpsim

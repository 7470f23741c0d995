#include "thpsim/optics_budget.hpp"

#include <cmath>
#include <stdexcept>

namespace thpsim {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

std::string normalize_segment_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (std::size_t i = 0; i < name.size();) {
    // U+2013 / U+2014 dashes and U+2605 black star, UTF-8 encoded.
    if (name.substr(i, 3) == "\xE2\x80\x93" || name.substr(i, 3) == "\xE2\x80\x94") {
      out.push_back('-');
      i += 3;
    } else if (name.substr(i, 3) == "\xE2\x98\x85") {
      out.push_back('*');
      i += 3;
    } else {
      out.push_back(name[i]);
      ++i;
    }
  }
  const auto first = out.find_first_not_of(" \t");
  const auto last = out.find_last_not_of(" \t");
  if (first == std::string::npos) return {};
  return out.substr(first, last - first + 1);
}

bool WavelengthProfile::has(std::string_view seg) const {
  return path_losses_db.find(normalize_segment_name(seg)) != path_losses_db.end();
}

double WavelengthProfile::loss(std::string_view seg) const {
  auto it = path_losses_db.find(normalize_segment_name(seg));
  if (it == path_losses_db.end()) {
    throw std::out_of_range("profile '" + name + "' has no segment '" +
                            std::string(seg) + "'");
  }
  return it->second;
}

void WavelengthProfile::validate() const {
  if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm)) {
    throw std::invalid_argument("profile '" + name + "': wavelength must be > 0");
  }
  if (v_half < 0.0 || !std::isfinite(v_half)) {
    throw std::invalid_argument("profile '" + name + "': v_half must be >= 0");
  }
  for (const auto& [seg, db] : path_losses_db) {
    if (!std::isfinite(db) || db < 0.0) {
      throw std::invalid_argument("profile '" + name + "': loss of '" + seg +
                                  "' must be a finite value >= 0 dB");
    }
  }
  if (has(segment::kZCXBest) && has(segment::kZCXWorst) &&
      loss(segment::kZCXWorst) < loss(segment::kZCXBest)) {
    throw std::invalid_argument("profile '" + name +
                                "': Z-C*-X(worst) is below Z-C*-X(best)");
  }
}

double db_to_transmittance(double loss_db) {
  require_finite(loss_db, "loss");
  return std::pow(10.0, -loss_db / 10.0);
}

double transmittance_to_db(double transmittance) {
  if (!(transmittance > 0.0) || !std::isfinite(transmittance)) {
    throw std::invalid_argument("transmittance must be finite and > 0");
  }
  return -10.0 * std::log10(transmittance);
}

double mean_photons_per_pulse(double avg_power_w, double rep_rate_hz,
                              double wavelength_m) {
  if (!(avg_power_w > 0.0) || !(rep_rate_hz > 0.0) || !(wavelength_m > 0.0) ||
      !std::isfinite(avg_power_w) || !std::isfinite(rep_rate_hz) ||
      !std::isfinite(wavelength_m)) {
    throw std::invalid_argument("power, repetition rate and wavelength must be > 0");
  }
  const double photon_energy = kPlanck * kSpeedOfLight / wavelength_m;
  return avg_power_w / (rep_rate_hz * photon_energy);
}

namespace {

double excess_click_fraction(const PhotonCountRecord& rec) {
  if (!(rec.pulses_sent > 0.0)) {
    throw std::invalid_argument("pulses_sent must be > 0");
  }
  if (!(rec.detector_efficiency > 0.0) || rec.detector_efficiency > 1.0) {
    throw std::invalid_argument("detector efficiency must lie in (0, 1]");
  }
  if (rec.dark_clicks < 0.0 || rec.clicks < rec.dark_clicks) {
    throw std::invalid_argument("click counts must satisfy n >= d >= 0");
  }
  const double frac = (rec.clicks - rec.dark_clicks) / rec.pulses_sent;
  if (frac >= 1.0) {
    throw std::domain_error("detector saturated: (n-d)/N >= 1 cannot be inverted");
  }
  return frac;
}

}  // namespace

double estimate_mu_from_counts(const PhotonCountRecord& rec) {
  const double frac = excess_click_fraction(rec);
  return -std::log1p(-frac) / rec.detector_efficiency;
}

double estimate_mu_linear(const PhotonCountRecord& rec) {
  return excess_click_fraction(rec) / rec.detector_efficiency;
}

double path_loss(const WavelengthProfile& profile,
                 std::span<const std::string> path) {
  double total = 0.0;
  for (const auto& seg : path) total += profile.loss(seg);
  return total;
}

double path_loss(const WavelengthProfile& profile,
                 std::initializer_list<std::string_view> path) {
  double total = 0.0;
  for (auto seg : path) total += profile.loss(seg);
  return total;
}

double midway_polarization_loss(double best_db, double worst_db) {
  require_finite(best_db, "best-case loss");
  require_finite(worst_db, "worst-case loss");
  if (worst_db < best_db) {
    throw std::invalid_argument("worst-case loss is below best-case loss");
  }
  if (worst_db == best_db) return best_db;
  const double mean_t =
      0.5 * (db_to_transmittance(best_db) + db_to_transmittance(worst_db));
  return transmittance_to_db(mean_t);
}

double rho_factor(double loss_l_db, double loss_s_db) {
  require_finite(loss_l_db, "attack-wavelength loss");
  require_finite(loss_s_db, "signal-wavelength loss");
  return std::pow(10.0, (loss_l_db - loss_s_db) / 10.0);
}

std::vector<std::string> double_pass_path() {
  return {std::string(segment::kXY), std::string(segment::kYZ),
          std::string(segment::kZStar), std::string(segment::kYZ),
          std::string(segment::kXY)};
}

std::vector<std::string> circulator_path_best() {
  return {std::string(segment::kXY), std::string(segment::kYZ),
          std::string(segment::kZCXBest)};
}

std::vector<std::string> circulator_path_worst() {
  return {std::string(segment::kXY), std::string(segment::kYZ),
          std::string(segment::kZCXWorst)};
}

}  // namespace thpsim

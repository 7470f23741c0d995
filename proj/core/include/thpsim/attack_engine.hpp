#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thpsim/detector_model.hpp"
#include "thpsim/protocol_sim.hpp"

namespace thpsim {

// How the non-burst slots of each burst period are arranged.
enum class Layout {
  interleave,         // blocked and low-loss slots spread evenly after the burst
  block_after_burst,  // all blocked slots right after the burst, low-loss last
};

std::string to_string(Layout layout);
Layout layout_from_string(const std::string& name);

struct AttackCombination {
  int n_block = 0;
  int n_lowloss = 0;
  double t_ll = 0.5;
  int n_thp_slots = 0;
  int n_bursts = 0;
  int burst_len = 0;
  // Probe brightness at the receiver entrance, counted in signal-wavelength
  // equivalent photons; the wavelength change enters via afterpulse_scale.
  double thp_photons = 0.0;
  double readout_theta = 0.0;  // rad
  double readout_mu = 0.0;     // photons reaching Eve's homodyne
  Layout layout = Layout::interleave;

  void validate(const FrameConfig& cfg) const;
  auto operator<=>(const AttackCombination&) const = default;
};

/// 433 blocked, 642 low-loss at T_LL = 0.5, 334 probed slots in 12 bursts of
/// up to 28, read out with mu = 20 at the given angle.
AttackCombination reference_combination(double readout_theta);

struct BreachReport {
  AttackCombination combination;
  SimResult result;
  double i_est = 0.0;
  double q_abort = 0.0;
  double readout_error = 0.0;
  double baseline_rate = 0.0;
  double rate_deviation = 0.0;  // relative to the no-attack detection rate
  bool breach = false;

  double objective() const;
};

bool is_breach(double qber, std::optional<double> eve_info, double q_abort, double i_est);

/// Bursts of probed slots are spaced evenly; the remaining slots of each
/// burst period hold a proportional share of the blocked slots.
FramePlan build_frame_plan(const AttackCombination& combo, const FrameConfig& cfg);

/// Fraction of sifted bits Eve knows. Draws one readout outcome per sifted
/// probed slot; empty when nothing was sifted.
std::optional<double> eve_information(std::span<SlotOutcome> outcomes, double readout_err,
                                      RngStream& rng);

struct EvalSettings {
  double i_est = 0.506;
  double excess_noise = 1.0;  // homodyne noise multiplier
  SimOptions sim;
};

/// No-attack detection rate (every slot passed at T).
double baseline_detection_rate(const FrameConfig& cfg, const DetectorParams& d0,
                               const DetectorParams& d1, std::uint64_t n_frames,
                               std::uint64_t seed, const SimOptions& sim = {});

BreachReport evaluate(const AttackCombination& combo, const FrameConfig& cfg,
                      const DetectorParams& d0, const DetectorParams& d1,
                      std::uint64_t n_frames, std::uint64_t seed,
                      const EvalSettings& settings = {},
                      std::optional<double> baseline_rate = std::nullopt);

// Candidate values per parameter; the search enumerates their product.
struct ParameterGrid {
  std::vector<int> n_block;
  std::vector<double> t_ll;
  std::vector<int> n_thp_slots;
  std::vector<int> n_bursts;
  std::vector<int> burst_len;
  std::vector<double> thp_photons;
  std::vector<double> readout_mu;
  double readout_theta = 0.0;
  Layout layout = Layout::interleave;

  /// Valid combinations in lexicographic order, independent of the order
  /// in which values were listed. Invalid ones are skipped.
  std::vector<AttackCombination> combinations(const FrameConfig& cfg) const;
};

/// Expands "min/max/step" into an inclusive list.
std::vector<double> grid_range(double min, double max, double step);

struct OptimizeSettings {
  std::uint64_t n_frames = 1000;
  std::uint64_t seed = 1;
  std::optional<double> rate_tolerance = 0.05;  // nullopt disables the check
  std::optional<std::size_t> budget;           // max evaluations
  EvalSettings eval;
};

using Evaluator = std::function<BreachReport(const AttackCombination&)>;

/// Ranks the breaching, rate-matched reports: larger I_act - I_est first,
/// then lower Q, then the smaller combination.
std::vector<BreachReport> rank_reports(std::vector<BreachReport> reports,
                                       std::optional<double> rate_tolerance);

/// Evaluates combinations (in order, up to budget) and ranks them.
std::vector<BreachReport> optimize(std::span<const AttackCombination> combos,
                                   const Evaluator& evaluator,
                                   const OptimizeSettings& settings);

/// Grid search with Monte Carlo evaluation; every combination shares the
/// seed and the no-attack baseline.
std::vector<BreachReport> optimize(const ParameterGrid& grid, const FrameConfig& cfg,
                                   const DetectorParams& d0, const DetectorParams& d1,
                                   const OptimizeSettings& settings);

}  // namespace thpsim

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "thpsim/detector_model.hpp"
#include "thpsim/rng.hpp"
#include "thpsim/stats.hpp"

namespace thpsim {

struct FrameConfig {
  int n_slots = 1075;
  double channel_transmittance = 0.25;
  double signal_mu = 0.5;         // at Alice's output
  double intrinsic_qber = 0.01;   // optical error of signal clicks
  double q_abort = 0.08;
  // Share of single clicks that survive the SARG04 sieve.
  double sieve_acceptance = 0.25;

  void validate() const;
};

// What Eve does with one slot.
struct Pass {};
struct Block {};
struct LowLoss {
  double transmittance = 1.0;
};
struct LowLossWithThp {
  double transmittance = 1.0;
  double thp_photons = 0.0;  // at the receiver entrance
};
using SlotAction = std::variant<Pass, Block, LowLoss, LowLossWithThp>;
using FramePlan = std::vector<SlotAction>;

bool is_probe(const SlotAction& a);

struct SlotOutcome {
  bool gated = false;  // false while the detectors are dead
  bool clicked_d0 = false;
  bool clicked_d1 = false;
  bool sifted = false;
  bool bit_error = false;
  bool probed = false;  // the slot carried a THP
  bool eve_knows_bit = false;
  ClickCause cause = ClickCause::none;
};

/// Simulates one frame. Afterpulse hazards seeded by THPs persist across
/// later slots (also while the detectors are dead); a click in either
/// detector un-gates both for deadtime_gates slots.
std::vector<SlotOutcome> run_frame(const FrameConfig& cfg, const FramePlan& plan,
                                   const DetectorParams& d0, const DetectorParams& d1,
                                   RngStream& rng);

/// Draws Eve's readout success for every sifted bit of a probed slot and
/// records it in eve_knows_bit. In SARG04 Bob's basis is the bit, so a
/// correct basis readout reveals the bit whatever caused the click.
void sample_readout(std::span<SlotOutcome> outcomes, double readout_error, RngStream& rng);

struct FrameTally {
  std::uint64_t slots = 0;
  std::uint64_t gated = 0;
  std::uint64_t clicks = 0;
  std::uint64_t double_clicks = 0;
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
  std::uint64_t known = 0;
  std::uint64_t signal_clicks = 0;
  std::uint64_t dark_clicks = 0;
  std::uint64_t afterpulse_clicks = 0;

  FrameTally& operator+=(const FrameTally& o);
  bool operator==(const FrameTally&) const = default;
};

FrameTally tally(std::span<const SlotOutcome> outcomes);

struct SimResult {
  Estimate qber;
  std::optional<Estimate> eve_info;  // empty when nothing was sifted
  Estimate detection_rate;           // clicks per slot
  std::uint64_t sifted_count = 0;
  std::uint64_t frames = 0;
  FrameTally counts;
};

SimResult summarize(const FrameTally& t, std::uint64_t frames);

struct SimOptions {
  unsigned workers = 1;  // 0 = hardware concurrency
  double readout_error = 0.0;
};

/// Runs n_frames independent frames; frame f draws from stream f of seed.
/// The result does not depend on the number of workers.
SimResult run_simulation(const FrameConfig& cfg, const FramePlan& plan,
                         const DetectorParams& d0, const DetectorParams& d1,
                         std::uint64_t n_frames, std::uint64_t seed,
                         const SimOptions& options = {});

}  // namespace thpsim

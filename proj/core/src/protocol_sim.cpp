#include "thpsim/protocol_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

namespace thpsim {

void FrameConfig::validate() const {
  if (n_slots <= 0) throw std::invalid_argument("frame must have at least one slot");
  if (!(channel_transmittance >= 0.0 && channel_transmittance <= 1.0)) {
    throw std::invalid_argument("channel transmittance must lie in [0, 1]");
  }
  if (!(signal_mu >= 0.0)) throw std::invalid_argument("signal mu must be >= 0");
  if (!(intrinsic_qber >= 0.0 && intrinsic_qber < 0.5)) {
    throw std::invalid_argument("intrinsic QBER must lie in [0, 0.5)");
  }
  if (!(q_abort > 0.0 && q_abort <= 1.0)) throw std::invalid_argument("q_abort must lie in (0, 1]");
  if (!(sieve_acceptance > 0.0 && sieve_acceptance <= 1.0)) {
    throw std::invalid_argument("sieve acceptance must lie in (0, 1]");
  }
}

bool is_probe(const SlotAction& a) { return std::holds_alternative<LowLossWithThp>(a); }

namespace {

constexpr std::size_t kMaxTraps = 4;

void check_action(const SlotAction& a, std::size_t slot) {
  auto bad = [slot](const char* what) {
    throw std::invalid_argument("slot " + std::to_string(slot) + ": " + what);
  };
  if (const auto* ll = std::get_if<LowLoss>(&a)) {
    if (!(ll->transmittance >= 0.0 && ll->transmittance <= 1.0)) bad("T_LL outside [0, 1]");
  } else if (const auto* thp = std::get_if<LowLossWithThp>(&a)) {
    if (!(thp->transmittance >= 0.0 && thp->transmittance <= 1.0)) bad("T_LL outside [0, 1]");
    if (!(thp->thp_photons >= 0.0)) bad("THP photon number < 0");
  }
}

double slot_transmittance(const SlotAction& a, double channel) {
  return std::visit(
      [channel](const auto& act) -> double {
        using A = std::decay_t<decltype(act)>;
        if constexpr (std::is_same_v<A, Pass>) {
          return channel;
        } else if constexpr (std::is_same_v<A, Block>) {
          return 0.0;
        } else {
          return act.transmittance;
        }
      },
      a);
}

// Pending afterpulse hazard of one detector, one amplitude per trap.
class TrapState {
 public:
  explicit TrapState(const DetectorParams& p) : n_(p.traps.size()) {
    if (n_ > kMaxTraps) throw std::invalid_argument("at most 4 trap components are supported");
    for (std::size_t k = 0; k < n_; ++k) {
      decay_[k] = std::exp(-p.gate_period_s / p.traps[k].lifetime_s);
      seed_[k] = p.afterpulse_scale * p.traps[k].amplitude;
    }
  }

  void advance() {
    for (std::size_t k = 0; k < n_; ++k) level_[k] *= decay_[k];
  }

  void inject(double photons) {
    for (std::size_t k = 0; k < n_; ++k) level_[k] += seed_[k] * photons;
  }

  double hazard() const {
    double h = 0.0;
    for (std::size_t k = 0; k < n_; ++k) h += level_[k];
    return std::min(h, 1.0);
  }

 private:
  std::size_t n_;
  std::array<double, kMaxTraps> decay_{};
  std::array<double, kMaxTraps> seed_{};
  std::array<double, kMaxTraps> level_{};
};

}  // namespace

std::vector<SlotOutcome> run_frame(const FrameConfig& cfg, const FramePlan& plan,
                                   const DetectorParams& d0, const DetectorParams& d1,
                                   RngStream& rng) {
  cfg.validate();
  d0.validate();
  d1.validate();
  if (plan.size() != static_cast<std::size_t>(cfg.n_slots)) {
    throw std::invalid_argument("plan has " + std::to_string(plan.size()) +
                                " slots, frame expects " + std::to_string(cfg.n_slots));
  }
  for (std::size_t s = 0; s < plan.size(); ++s) check_action(plan[s], s);

  const std::array<const DetectorParams*, 2> det{&d0, &d1};
  std::array<TrapState, 2> traps{TrapState(d0), TrapState(d1)};
  const int deadtime = std::max(d0.deadtime_gates, d1.deadtime_gates);

  std::vector<SlotOutcome> out(plan.size());
  int dead_left = 0;
  for (std::size_t s = 0; s < plan.size(); ++s) {
    SlotOutcome& o = out[s];
    const SlotAction& action = plan[s];
    o.probed = is_probe(action);
    if (s > 0) {
      traps[0].advance();
      traps[1].advance();
    }

    if (dead_left > 0) {
      --dead_left;
    } else {
      o.gated = true;
      const double photons = cfg.signal_mu * slot_transmittance(action, cfg.channel_transmittance);
      const std::size_t target = rng.uniform() < 0.5 ? 0 : 1;
      std::array<GateSample, 2> g;
      for (std::size_t d = 0; d < 2; ++d) {
        g[d] = sample_gate(*det[d], d == target ? photons : 0.0, traps[d].hazard(), rng);
      }
      o.clicked_d0 = g[0].click;
      o.clicked_d1 = g[1].click;
      if (g[0].click || g[1].click) {
        dead_left = deadtime;
        if (g[0].click && g[1].click) {
          o.cause = (g[0].cause == ClickCause::signal || g[1].cause == ClickCause::signal)
                        ? ClickCause::signal
                        : g[0].cause;
        } else {
          o.cause = g[0].click ? g[0].cause : g[1].cause;
          if (rng.uniform() < cfg.sieve_acceptance) {
            o.sifted = true;
            const double p_err = o.cause == ClickCause::signal ? cfg.intrinsic_qber : 0.5;
            o.bit_error = rng.uniform() < p_err;
          }
        }
      }
    }

    // The THP arrives outside the gate; its afterpulses start with the
    // next gate.
    if (const auto* thp = std::get_if<LowLossWithThp>(&action)) {
      traps[0].inject(thp->thp_photons);
      traps[1].inject(thp->thp_photons);
    }
  }
  return out;
}

void sample_readout(std::span<SlotOutcome> outcomes, double readout_error, RngStream& rng) {
  if (!(readout_error >= 0.0 && readout_error <= 1.0)) {
    throw std::invalid_argument("readout error must lie in [0, 1]");
  }
  // One draw per sifted bit, probed or not, so the stream does not depend on
  // which slots carried a THP.
  for (auto& o : outcomes) {
    if (!o.sifted) {
      o.eve_knows_bit = false;
      continue;
    }
    const bool read_ok = rng.uniform() >= readout_error;
    o.eve_knows_bit = o.probed && read_ok;
  }
}

FrameTally& FrameTally::operator+=(const FrameTally& o) {
  slots += o.slots;
  gated += o.gated;
  clicks += o.clicks;
  double_clicks += o.double_clicks;
  sifted += o.sifted;
  errors += o.errors;
  known += o.known;
  signal_clicks += o.signal_clicks;
  dark_clicks += o.dark_clicks;
  afterpulse_clicks += o.afterpulse_clicks;
  return *this;
}

FrameTally tally(std::span<const SlotOutcome> outcomes) {
  FrameTally t;
  t.slots = outcomes.size();
  for (const auto& o : outcomes) {
    t.gated += o.gated;
    const bool click = o.clicked_d0 || o.clicked_d1;
    t.clicks += click;
    t.double_clicks += o.clicked_d0 && o.clicked_d1;
    t.sifted += o.sifted;
    t.errors += o.sifted && o.bit_error;
    t.known += o.eve_knows_bit;
    if (click) {
      t.signal_clicks += o.cause == ClickCause::signal;
      t.dark_clicks += o.cause == ClickCause::dark;
      t.afterpulse_clicks += o.cause == ClickCause::afterpulse;
    }
  }
  return t;
}

SimResult summarize(const FrameTally& t, std::uint64_t frames) {
  SimResult r;
  r.counts = t;
  r.frames = frames;
  r.sifted_count = t.sifted;
  r.qber = wilson_interval(t.errors, t.sifted);
  if (t.sifted > 0) r.eve_info = wilson_interval(t.known, t.sifted);
  r.detection_rate = wilson_interval(t.clicks, t.slots);
  return r;
}

SimResult run_simulation(const FrameConfig& cfg, const FramePlan& plan,
                         const DetectorParams& d0, const DetectorParams& d1,
                         std::uint64_t n_frames, std::uint64_t seed,
                         const SimOptions& options) {
  if (n_frames == 0) throw std::invalid_argument("need at least one frame");
  cfg.validate();
  unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.workers;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_frames));

  auto simulate_frame = [&](std::uint64_t f) {
    RngStream rng = RngStream::derive(seed, f);
    auto outcomes = run_frame(cfg, plan, d0, d1, rng);
    sample_readout(outcomes, options.readout_error, rng);
    return tally(outcomes);
  };

  // Tallies are integer sums, so the reduction order cannot change them.
  std::vector<FrameTally> partial(workers);
  if (workers == 1) {
    for (std::uint64_t f = 0; f < n_frames; ++f) partial[0] += simulate_frame(f);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::uint64_t f = w; f < n_frames; f += workers) partial[w] += simulate_frame(f);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  FrameTally total;
  for (const auto& p : partial) total += p;
  return summarize(total, n_frames);
}

}  // namespace thpsim

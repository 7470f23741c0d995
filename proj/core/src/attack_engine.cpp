#include "thpsim/attack_engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "thpsim/phase_readout.hpp"

namespace thpsim {

std::string to_string(Layout layout) {
  switch (layout) {
    case Layout::interleave:
      return "interleave";
    case Layout::block_after_burst:
      return "block_after_burst";
  }
  return "?";
}

Layout layout_from_string(const std::string& name) {
  if (name == "interleave") return Layout::interleave;
  if (name == "block_after_burst") return Layout::block_after_burst;
  throw std::invalid_argument("unknown layout '" + name +
                              "' (expected interleave or block_after_burst)");
}

void AttackCombination::validate(const FrameConfig& cfg) const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("attack combination: " + what);
  };
  if (n_block < 0 || n_lowloss < 0 || n_thp_slots < 0 || n_bursts < 0 || burst_len < 0) {
    fail("slot counts must be >= 0");
  }
  if (n_block + n_lowloss != cfg.n_slots) {
    fail("n_block + n_lowloss = " + std::to_string(n_block + n_lowloss) + " but the frame has " +
         std::to_string(cfg.n_slots) + " slots");
  }
  if (n_thp_slots > n_lowloss) fail("more probed slots than low-loss slots");
  if (static_cast<long long>(n_bursts) * burst_len < n_thp_slots) {
    fail("bursts cannot hold all probed slots");
  }
  if (n_thp_slots > 0 && n_bursts > cfg.n_slots) fail("more bursts than slots");
  if (!(t_ll >= 0.0 && t_ll <= 1.0)) fail("T_LL must lie in [0, 1]");
  if (!(thp_photons >= 0.0)) fail("THP photon number must be >= 0");
  if (!(readout_mu >= 0.0)) fail("readout mu must be >= 0");
  if (!(readout_theta >= 0.0 && readout_theta <= 3.14159265358979323847)) {
    fail("readout angle must lie in [0, pi]");
  }
}

AttackCombination reference_combination(double readout_theta) {
  AttackCombination c;
  c.n_block = 433;
  c.n_lowloss = 642;
  c.t_ll = 0.5;
  c.n_thp_slots = 334;
  c.n_bursts = 12;
  c.burst_len = 28;
  c.thp_photons = kReferenceThpPhotons;
  c.readout_theta = readout_theta;
  c.readout_mu = 20.0;
  return c;
}

double BreachReport::objective() const {
  return result.eve_info ? result.eve_info->value - i_est : -i_est;
}

bool is_breach(double qber, std::optional<double> eve_info, double q_abort, double i_est) {
  return eve_info.has_value() && qber < q_abort && *eve_info > i_est;
}

FramePlan build_frame_plan(const AttackCombination& combo, const FrameConfig& cfg) {
  cfg.validate();
  combo.validate(cfg);
  const int n = cfg.n_slots;
  const SlotAction lowloss = LowLoss{combo.t_ll};
  const SlotAction probe = LowLossWithThp{combo.t_ll, combo.thp_photons};
  const SlotAction block = Block{};

  const int periods = combo.n_thp_slots > 0 ? combo.n_bursts : 1;
  std::vector<int> start(periods + 1);
  for (int i = 0; i <= periods; ++i) {
    start[i] = static_cast<int>(static_cast<long long>(i) * n / periods);
  }
  // Full bursts first; the last one absorbs any shortfall.
  std::vector<int> burst(periods, 0);
  int remaining = combo.n_thp_slots;
  for (int i = 0; i < periods; ++i) {
    burst[i] = std::min(combo.burst_len, remaining);
    remaining -= burst[i];
    if (burst[i] > start[i + 1] - start[i]) {
      throw std::invalid_argument("burst longer than its period; use more bursts or shorter ones");
    }
  }

  // Share blocked slots in proportion to each period's free capacity.
  const long long capacity_total = n - combo.n_thp_slots;
  std::vector<int> blocked(periods, 0);
  long long cum_cap = 0;
  auto share = [&](long long cap) {
    return capacity_total == 0 ? 0LL
                               : (static_cast<long long>(combo.n_block) * cap * 2 + capacity_total) /
                                     (2 * capacity_total);
  };
  for (int i = 0; i < periods; ++i) {
    const int cap = start[i + 1] - start[i] - burst[i];
    blocked[i] = static_cast<int>(share(cum_cap + cap) - share(cum_cap));
    cum_cap += cap;
  }

  FramePlan plan;
  plan.reserve(n);
  for (int i = 0; i < periods; ++i) {
    for (int k = 0; k < burst[i]; ++k) plan.push_back(probe);
    const int cap = start[i + 1] - start[i] - burst[i];
    const int nb = blocked[i];
    if (combo.layout == Layout::block_after_burst) {
      for (int k = 0; k < nb; ++k) plan.push_back(block);
      for (int k = nb; k < cap; ++k) plan.push_back(lowloss);
    } else {
      for (int j = 0; j < cap; ++j) {
        const long long before = static_cast<long long>(j) * nb / cap;
        const long long after = static_cast<long long>(j + 1) * nb / cap;
        plan.push_back(after > before ? block : lowloss);
      }
    }
  }
  return plan;
}

std::optional<double> eve_information(std::span<SlotOutcome> outcomes, double readout_err,
                                      RngStream& rng) {
  sample_readout(outcomes, readout_err, rng);
  std::uint64_t sifted = 0;
  std::uint64_t known = 0;
  for (const auto& o : outcomes) {
    sifted += o.sifted;
    known += o.eve_knows_bit;
  }
  if (sifted == 0) return std::nullopt;
  return static_cast<double>(known) / static_cast<double>(sifted);
}

double baseline_detection_rate(const FrameConfig& cfg, const DetectorParams& d0,
                               const DetectorParams& d1, std::uint64_t n_frames,
                               std::uint64_t seed, const SimOptions& sim) {
  const FramePlan plan(static_cast<std::size_t>(cfg.n_slots), Pass{});
  return run_simulation(cfg, plan, d0, d1, n_frames, seed, sim).detection_rate.value;
}

BreachReport evaluate(const AttackCombination& combo, const FrameConfig& cfg,
                      const DetectorParams& d0, const DetectorParams& d1,
                      std::uint64_t n_frames, std::uint64_t seed, const EvalSettings& settings,
                      std::optional<double> baseline_rate) {
  const FramePlan plan = build_frame_plan(combo, cfg);
  BreachReport r;
  r.combination = combo;
  r.i_est = settings.i_est;
  r.q_abort = cfg.q_abort;
  r.readout_error = readout_error_prob({combo.readout_mu, combo.readout_theta}, settings.excess_noise);
  SimOptions sim = settings.sim;
  sim.readout_error = r.readout_error;
  r.result = run_simulation(cfg, plan, d0, d1, n_frames, seed, sim);
  r.baseline_rate = baseline_rate ? *baseline_rate
                                  : baseline_detection_rate(cfg, d0, d1, n_frames, seed, sim);
  r.rate_deviation = r.baseline_rate > 0.0
                         ? std::abs(r.result.detection_rate.value - r.baseline_rate) / r.baseline_rate
                         : (r.result.detection_rate.value > 0.0 ? 1.0 : 0.0);
  std::optional<double> info;
  if (r.result.eve_info) info = r.result.eve_info->value;
  r.breach = is_breach(r.result.qber.value, info, r.q_abort, r.i_est);
  return r;
}

namespace {

template <typename T>
std::vector<T> canonical(const std::vector<T>& v) {
  std::set<T> s(v.begin(), v.end());
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<AttackCombination> ParameterGrid::combinations(const FrameConfig& cfg) const {
  const auto blocks = canonical(n_block);
  const auto tlls = canonical(t_ll);
  const auto thps = canonical(n_thp_slots);
  const auto bursts = canonical(n_bursts);
  const auto lens = canonical(burst_len);
  const auto photons = canonical(thp_photons);
  const auto mus = canonical(readout_mu);
  std::vector<AttackCombination> out;
  for (int nb : blocks)
    for (double t : tlls)
      for (int nt : thps)
        for (int bursts_n : bursts)
          for (int len : lens)
            for (double ph : photons)
              for (double mu : mus) {
                AttackCombination c;
                c.n_block = nb;
                c.n_lowloss = cfg.n_slots - nb;
                c.t_ll = t;
                c.n_thp_slots = nt;
                c.n_bursts = bursts_n;
                c.burst_len = len;
                c.thp_photons = ph;
                c.readout_mu = mu;
                c.readout_theta = readout_theta;
                c.layout = layout;
                try {
                  c.validate(cfg);
                  (void)build_frame_plan(c, cfg);
                } catch (const std::invalid_argument&) {
                  continue;
                }
                out.push_back(c);
              }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> grid_range(double min, double max, double step) {
  if (!(step > 0.0) || max < min) {
    throw std::invalid_argument("grid range needs step > 0 and max >= min");
  }
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((max - min) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) out.push_back(min + static_cast<double>(i) * step);
  return out;
}

std::vector<BreachReport> rank_reports(std::vector<BreachReport> reports,
                                       std::optional<double> rate_tolerance) {
  std::erase_if(reports, [&](const BreachReport& r) {
    return !r.breach || (rate_tolerance && r.rate_deviation > *rate_tolerance);
  });
  std::sort(reports.begin(), reports.end(), [](const BreachReport& a, const BreachReport& b) {
    const double oa = a.objective();
    const double ob = b.objective();
    if (oa != ob) return oa > ob;
    if (a.result.qber.value != b.result.qber.value) return a.result.qber.value < b.result.qber.value;
    return a.combination < b.combination;
  });
  return reports;
}

std::vector<BreachReport> optimize(std::span<const AttackCombination> combos,
                                   const Evaluator& evaluator, const OptimizeSettings& settings) {
  std::size_t limit = combos.size();
  if (settings.budget) limit = std::min(limit, *settings.budget);
  std::vector<BreachReport> reports;
  reports.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) reports.push_back(evaluator(combos[i]));
  return rank_reports(std::move(reports), settings.rate_tolerance);
}

std::vector<BreachReport> optimize(const ParameterGrid& grid, const FrameConfig& cfg,
                                   const DetectorParams& d0, const DetectorParams& d1,
                                   const OptimizeSettings& settings) {
  const auto combos = grid.combinations(cfg);
  if (combos.empty()) return {};
  const double baseline =
      baseline_detection_rate(cfg, d0, d1, settings.n_frames, settings.seed, settings.eval.sim);
  const Evaluator eval = [&](const AttackCombination& c) {
    return evaluate(c, cfg, d0, d1, settings.n_frames, settings.seed, settings.eval, baseline);
  };
  return optimize(combos, eval, settings);
}

}  // namespace thpsim

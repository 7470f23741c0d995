#include "thpsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace thpsim {

using nlohmann::json;

namespace {

// Walks a JSON object, tracking the field path for error messages and
// rejecting keys nobody asked for.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config field '" + (path_.empty() ? std::string("<root>") : path_) +
                      "': " + what);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  Node child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail("missing key '" + key + "'");
    return Node(j_.at(key), sub(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail("missing key '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError("config field '" + sub(key) + "': expected a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) {
      throw ConfigError("config field '" + sub(key) + "': expected an integer");
    }
    return v.get<long long>();
  }

  long long integer_or(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError("config field '" + sub(key) + "': expected a string");
    return v.get<std::string>();
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError("config field '" + sub(key) + "': expected true/false");
    return v.get<bool>();
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& value() const { return j_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

WavelengthProfile parse_profile(Node n, const std::string& name) {
  WavelengthProfile p;
  p.name = name;
  p.wavelength_nm = n.number("wavelength_nm");
  p.v_half = n.number_or("v_half", 0.0);
  Node losses = n.child("losses_db");
  for (auto it = losses.value().begin(); it != losses.value().end(); ++it) {
    const std::string key = normalize_segment_name(it.key());
    if (!it.value().is_number()) {
      throw ConfigError("config field '" + losses.sub(it.key()) + "': expected a number");
    }
    p.path_losses_db[key] = it.value().get<double>();
    (void)losses.has(it.key());
  }
  losses.finish();
  p.reflection_borrowed = n.boolean_or("reflection_borrowed", false);
  if (n.has("reflection_note")) p.reflection_note = n.string("reflection_note");
  p.fiber_loss_db_per_km = n.number_or("fiber_loss_db_per_km", 0.0);
  n.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
  return p;
}

DetectorParams parse_detector(Node n) {
  DetectorParams d = default_detector();
  d.efficiency = n.number_or("efficiency", d.efficiency);
  d.dark_prob = n.number_or("dark_prob", d.dark_prob);
  d.gate_period_s = n.number_or("gate_period_s", d.gate_period_s);
  d.deadtime_gates = static_cast<int>(n.integer_or("deadtime_gates", d.deadtime_gates));
  if (n.has("traps")) {
    const json& traps = n.raw("traps");
    if (!traps.is_array()) throw ConfigError("config field '" + n.sub("traps") + "': expected a list");
    d.traps.clear();
    for (std::size_t i = 0; i < traps.size(); ++i) {
      Node t(traps[i], n.sub("traps") + "[" + std::to_string(i) + "]");
      d.traps.push_back({t.number("amplitude"), t.number("lifetime_s")});
      t.finish();
    }
  }
  n.finish();
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
  return d;
}

template <typename T>
std::vector<T> parse_axis(Node& parent, const std::string& key, std::vector<T> fallback) {
  if (!parent.has(key)) return fallback;
  const json& v = parent.raw(key);
  std::vector<T> out;
  auto convert = [&](double x) {
    if constexpr (std::is_integral_v<T>) {
      return static_cast<T>(std::llround(x));
    } else {
      return x;
    }
  };
  if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("config field '" + parent.sub(key) + "': expected numbers");
      out.push_back(convert(e.get<double>()));
    }
  } else if (v.is_object()) {
    Node r(v, parent.sub(key));
    const double lo = r.number("min");
    const double hi = r.number("max");
    const double step = r.number_or("step", 1.0);
    r.finish();
    try {
      for (double x : grid_range(lo, hi, step)) out.push_back(convert(x));
    } catch (const std::invalid_argument& e) {
      r.fail(e.what());
    }
  } else if (v.is_number()) {
    out.push_back(convert(v.get<double>()));
  } else {
    throw ConfigError("config field '" + parent.sub(key) +
                      "': expected a number, a list or {min, max, step}");
  }
  if (out.empty()) throw ConfigError("config field '" + parent.sub(key) + "': empty axis");
  return out;
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Config parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                      e.what());
  }
  Config cfg;
  Node n(root, "");
  if (n.has("profiles")) {
    Node profiles = n.child("profiles");
    if (profiles.has("signal")) cfg.signal = parse_profile(profiles.child("signal"), "signal");
    if (profiles.has("attack")) cfg.attack = parse_profile(profiles.child("attack"), "attack");
    profiles.finish();
  }
  if (n.has("photon_counting")) {
    Node pc = n.child("photon_counting");
    if (pc.has("avg_power_w") || pc.has("rep_rate_hz")) {
      cfg.power_at_z = PowerMeasurement{pc.number("avg_power_w"), pc.number("rep_rate_hz")};
    }
    if (pc.has("pulses_sent")) {
      cfg.counts_at_x = PhotonCountRecord{pc.number("pulses_sent"), pc.number("clicks"),
                                          pc.number("dark_clicks"),
                                          pc.number("detector_efficiency")};
    }
    pc.finish();
  }
  if (n.has("afterpulse_counts")) {
    Node ac = n.child("afterpulse_counts");
    auto read = [](Node c) {
      AfterpulseCounts a{c.number("thp_mu"), c.number("apc"), c.number("dc")};
      c.finish();
      return a;
    };
    if (ac.has("signal")) cfg.afterpulse_signal = read(ac.child("signal"));
    if (ac.has("attack")) cfg.afterpulse_attack = read(ac.child("attack"));
    ac.finish();
  }
  if (n.has("modulator")) {
    Node m = n.child("modulator");
    cfg.passes_signal = static_cast<int>(m.integer_or("passes_signal", cfg.passes_signal));
    cfg.passes_attack = static_cast<int>(m.integer_or("passes_attack", cfg.passes_attack));
    m.finish();
  }
  if (n.has("readout")) {
    Node r = n.child("readout");
    cfg.excess_noise = r.number_or("excess_noise", cfg.excess_noise);
    r.finish();
  }
  if (n.has("detectors")) {
    Node d = n.child("detectors");
    if (d.has("d0")) cfg.d0 = parse_detector(d.child("d0"));
    if (d.has("d1")) cfg.d1 = parse_detector(d.child("d1"));
    if (d.has("delta0")) cfg.delta0_override = d.number("delta0");
    if (d.has("delta1")) cfg.delta1_override = d.number("delta1");
    d.finish();
  }
  if (n.has("frame")) {
    Node f = n.child("frame");
    FrameConfig& fc = cfg.frame;
    fc.n_slots = static_cast<int>(f.integer_or("n_slots", fc.n_slots));
    fc.channel_transmittance = f.number_or("channel_transmittance", fc.channel_transmittance);
    fc.signal_mu = f.number_or("signal_mu", fc.signal_mu);
    fc.intrinsic_qber = f.number_or("intrinsic_qber", fc.intrinsic_qber);
    fc.q_abort = f.number_or("q_abort", fc.q_abort);
    fc.sieve_acceptance = f.number_or("sieve_acceptance", fc.sieve_acceptance);
    f.finish();
    try {
      fc.validate();
    } catch (const std::invalid_argument& e) {
      f.fail(e.what());
    }
  }
  if (n.has("security")) {
    Node s = n.child("security");
    cfg.i_est = s.number_or("i_est", cfg.i_est);
    s.finish();
  }
  if (n.has("attack")) {
    Node a = n.child("attack");
    AttackCombination c = reference_combination(-1.0);
    c.n_block = static_cast<int>(a.integer_or("n_block", c.n_block));
    c.n_lowloss = static_cast<int>(a.integer_or("n_lowloss", cfg.frame.n_slots - c.n_block));
    c.t_ll = a.number_or("t_ll", c.t_ll);
    c.n_thp_slots = static_cast<int>(a.integer_or("n_thp_slots", c.n_thp_slots));
    c.n_bursts = static_cast<int>(a.integer_or("n_bursts", c.n_bursts));
    c.burst_len = static_cast<int>(a.integer_or("burst_len", c.burst_len));
    c.thp_photons = a.number_or("thp_photons", c.thp_photons);
    c.readout_mu = a.number_or("readout_mu", c.readout_mu);
    c.readout_theta = a.number_or("readout_theta", -1.0);
    if (a.has("layout")) {
      try {
        c.layout = layout_from_string(a.string("layout"));
      } catch (const std::invalid_argument& e) {
        a.fail(e.what());
      }
    }
    a.finish();
    cfg.combination = c;
  }
  if (n.has("simulation")) {
    Node s = n.child("simulation");
    const long long frames = s.integer_or("frames", static_cast<long long>(cfg.frames));
    const long long seed = s.integer_or("seed", static_cast<long long>(cfg.seed));
    if (frames < 1) s.fail("frames must be >= 1");
    if (seed < 0) s.fail("seed must be >= 0");
    cfg.frames = static_cast<std::uint64_t>(frames);
    cfg.seed = static_cast<std::uint64_t>(seed);
    s.finish();
  }
  if (n.has("grid")) {
    Node g = n.child("grid");
    ParameterGrid grid;
    const AttackCombination ref = cfg.combination.value_or(reference_combination(-1.0));
    grid.n_block = parse_axis<int>(g, "n_block", {ref.n_block});
    grid.t_ll = parse_axis<double>(g, "t_ll", {ref.t_ll});
    grid.n_thp_slots = parse_axis<int>(g, "n_thp_slots", {ref.n_thp_slots});
    grid.n_bursts = parse_axis<int>(g, "n_bursts", {ref.n_bursts});
    grid.burst_len = parse_axis<int>(g, "burst_len", {ref.burst_len});
    grid.thp_photons = parse_axis<double>(g, "thp_photons", {ref.thp_photons});
    grid.readout_mu = parse_axis<double>(g, "readout_mu", {ref.readout_mu});
    grid.layout = ref.layout;
    grid.readout_theta = ref.readout_theta;
    if (g.has("layout")) {
      try {
        grid.layout = layout_from_string(g.string("layout"));
      } catch (const std::invalid_argument& e) {
        g.fail(e.what());
      }
    }
    if (g.has("rate_tolerance")) {
      const json& v = g.raw("rate_tolerance");
      if (v.is_null()) {
        cfg.rate_tolerance.reset();
      } else {
        cfg.rate_tolerance = g.number("rate_tolerance");
      }
    }
    if (g.has("budget")) {
      const long long b = g.integer("budget");
      if (b < 1) g.fail("budget must be >= 1");
      cfg.budget = static_cast<std::size_t>(b);
    }
    g.finish();
    cfg.grid = grid;
  }
  if (n.has("$schema")) (void)n.raw("$schema");
  if (n.has("description")) (void)n.raw("description");
  n.finish();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace thpsim

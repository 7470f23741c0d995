#include "thpsim/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "thpsim/phase_readout.hpp"

namespace thpsim {

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

}  // namespace

BudgetReport compute_budget(const Config& cfg) {
  BudgetReport r;
  if (!cfg.signal && !cfg.attack) {
    throw ConfigError("config has no wavelength profiles");
  }
  if (cfg.signal) {
    const auto& p = *cfg.signal;
    r.double_pass_signal = path_loss(p, double_pass_path());
    r.lines.push_back({"X-Y-Z*-Y-X (double pass)", p.name, *r.double_pass_signal});
  }
  if (cfg.attack) {
    const auto& p = *cfg.attack;
    r.double_pass_attack = path_loss(p, double_pass_path());
    r.lines.push_back({"X-Y-Z*-Y-X (double pass)", p.name, *r.double_pass_attack});
    r.circulator_best = path_loss(p, circulator_path_best());
    r.lines.push_back({"X-Y-Z-C*-X (best polarization)", p.name, *r.circulator_best});
    if (p.has(segment::kZCXWorst)) {
      r.circulator_worst = path_loss(p, circulator_path_worst());
      r.lines.push_back({"X-Y-Z-C*-X (worst polarization)", p.name, *r.circulator_worst});
      r.circulator_midway = midway_polarization_loss(*r.circulator_best, *r.circulator_worst);
    } else {
      r.circulator_midway = r.circulator_best;
      r.notices.push_back("no Z-C*-X(worst) entry: midway loss equals the best case");
    }
    r.lines.push_back({"X-Y-Z-C*-X (midway polarization)", p.name, *r.circulator_midway});
    if (p.reflection_borrowed) {
      r.notices.push_back("Z* reflection loss at " + fmt(p.wavelength_nm) + " nm is borrowed" +
                          (p.reflection_note.empty() ? "" : ": " + p.reflection_note));
    }
  }
  if (cfg.signal && cfg.signal->reflection_borrowed) {
    r.notices.push_back("Z* reflection loss at " + fmt(cfg.signal->wavelength_nm) +
                        " nm is borrowed" +
                        (cfg.signal->reflection_note.empty() ? "" : ": " + cfg.signal->reflection_note));
  }
  if (r.double_pass_signal && r.circulator_midway) {
    r.rho = rho_factor(*r.circulator_midway, *r.double_pass_signal);
  } else {
    r.notices.push_back("only one wavelength configured: rho not computed");
  }
  if (cfg.power_at_z && cfg.attack) {
    r.mu_at_z = mean_photons_per_pulse(cfg.power_at_z->avg_power_w, cfg.power_at_z->rep_rate_hz,
                                       cfg.attack->wavelength_nm * 1e-9);
  }
  if (cfg.counts_at_x) {
    r.mu_at_x = estimate_mu_from_counts(*cfg.counts_at_x);
  }
  if (r.mu_at_z && r.mu_at_x && *r.mu_at_x > 0.0) {
    r.measured_zcx_loss = transmittance_to_db(*r.mu_at_x / *r.mu_at_z);
  }
  return r;
}

Factors compute_factors(const Config& cfg) {
  if (!cfg.signal || !cfg.attack) {
    throw ConfigError("factors need both the signal and the attack profile");
  }
  if (!cfg.afterpulse_signal || !cfg.afterpulse_attack) {
    throw ConfigError("factors need afterpulse_counts.signal and afterpulse_counts.attack");
  }
  const auto& s = *cfg.signal;
  const auto& l = *cfg.attack;
  Factors f;
  const double theta_s =
      separation_angle({s.v_half, s.v_half, cfg.passes_signal});
  f.theta_s = {theta_s, std::to_string(cfg.passes_signal) + " pass(es) at " + fmt(s.v_half) + " V"};
  const double theta_l = separation_angle({s.v_half, l.v_half, cfg.passes_attack});
  f.theta_l = {theta_l, "V_pi/2 " + fmt(s.v_half) + " V / " + fmt(l.v_half) + " V, " +
                            std::to_string(cfg.passes_attack) + " pass(es)"};
  const BudgetReport b = compute_budget(cfg);
  f.rho = {*b.rho, "10^((" + fmt(*b.circulator_midway) + " - " + fmt(*b.double_pass_signal) +
                       ") / 10) from the loss profiles"};
  f.nu = {nu_factor(theta_s, theta_l), "(1 - cos theta_s) / (1 - cos theta_l)"};
  const auto& as = *cfg.afterpulse_signal;
  const auto& al = *cfg.afterpulse_attack;
  f.gamma = {gamma_factor(as.apc, as.dc, as.thp_mu, al.apc, al.dc, al.thp_mu),
             "ApC/DC " + fmt(as.apc) + "/" + fmt(as.dc) + " vs " + fmt(al.apc) + "/" + fmt(al.dc) +
                 ", mu " + fmt(as.thp_mu) + " vs " + fmt(al.thp_mu)};
  const DeltaFactors d = delta_factors(f.rho.value, f.nu.value, f.gamma.value, s, l);
  f.delta0 = {d.delta0, "rho * nu * gamma"};
  f.delta1 = {d.delta1, "delta0 corrected by X-D0 / X-C-D1 losses"};
  return f;
}

std::pair<DetectorParams, DetectorParams> detectors_for(const Config& cfg, AttackWavelength wl) {
  DetectorParams d0 = cfg.d0;
  DetectorParams d1 = cfg.d1;
  if (wl == AttackWavelength::signal) {
    d0.afterpulse_scale = 1.0;
    d1.afterpulse_scale = 1.0;
    return {d0, d1};
  }
  if (cfg.delta0_override && cfg.delta1_override) {
    d0.afterpulse_scale = *cfg.delta0_override;
    d1.afterpulse_scale = *cfg.delta1_override;
    return {d0, d1};
  }
  const Factors f = compute_factors(cfg);
  d0.afterpulse_scale = cfg.delta0_override.value_or(f.delta0.value);
  d1.afterpulse_scale = cfg.delta1_override.value_or(f.delta1.value);
  return {d0, d1};
}

AttackCombination combination_for(const Config& cfg, AttackWavelength wl) {
  AttackCombination c = cfg.combination.value_or(reference_combination(-1.0));
  if (c.readout_theta >= 0.0) return c;
  if (!cfg.signal || !cfg.attack) {
    throw ConfigError("readout angle needs both profiles (or set attack.readout_theta)");
  }
  const double theta_s = separation_angle({cfg.signal->v_half, cfg.signal->v_half, cfg.passes_signal});
  const double theta_l = separation_angle({cfg.signal->v_half, cfg.attack->v_half, cfg.passes_attack});
  if (wl == AttackWavelength::attack) {
    c.readout_theta = theta_l;
  } else {
    // Same |alpha - beta|^2 at the signal wavelength.
    c.readout_theta = theta_s;
    c.readout_mu /= nu_factor(theta_s, theta_l);
  }
  return c;
}

ParameterGrid grid_for(const Config& cfg, AttackWavelength wl) {
  const AttackCombination base = cfg.combination.value_or(reference_combination(-1.0));
  ParameterGrid g;
  if (cfg.grid) {
    g = *cfg.grid;
  } else {
    g.n_block = {base.n_block};
    g.t_ll = {base.t_ll};
    g.n_thp_slots = {base.n_thp_slots};
    g.n_bursts = {base.n_bursts};
    g.burst_len = {base.burst_len};
    g.thp_photons = {base.thp_photons};
    g.readout_mu = {base.readout_mu};
    g.layout = base.layout;
    g.readout_theta = base.readout_theta;
  }
  if (g.readout_theta >= 0.0) return g;
  AttackCombination probe = base;
  probe.readout_theta = -1.0;
  probe.readout_mu = 1.0;
  Config tmp = cfg;
  tmp.combination = probe;
  const AttackCombination filled = combination_for(tmp, wl);
  g.readout_theta = filled.readout_theta;
  for (double& mu : g.readout_mu) mu *= filled.readout_mu;
  return g;
}

}  // namespace thpsim

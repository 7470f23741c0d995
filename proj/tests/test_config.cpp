#include <doctest.h>

#include <numbers>
#include <string>

#include "thpsim/config.hpp"
#include "thpsim/pipeline.hpp"

using namespace thpsim;

namespace {

const std::string kDefault = THPSIM_DATA_DIR "/default_config.json";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("shipped config loads") {
    const Config cfg = load_config(kDefault);
    REQUIRE(cfg.signal);
    REQUIRE(cfg.attack);
    CHECK(cfg.signal->loss("Z*") == 51.7);
    CHECK(cfg.attack->v_half == 5.7);
    CHECK(cfg.frame.n_slots == 1075);
    REQUIRE(cfg.combination);
    CHECK(cfg.combination->n_block == 433);
    CHECK(cfg.combination->readout_theta < 0);  // derived later
    REQUIRE(cfg.grid);
    CHECK_FALSE(cfg.rate_tolerance);
    CHECK(cfg.d0.traps.size() == 2);
  }

  TEST_CASE("budget from the shipped config") {
    const BudgetReport b = compute_budget(load_config(kDefault));
    CHECK(*b.double_pass_signal == doctest::Approx(58.7).epsilon(0.005));
    CHECK(*b.double_pass_attack == doctest::Approx(104.9).epsilon(0.005));
    CHECK(*b.circulator_best == doctest::Approx(85.0).epsilon(0.005));
    CHECK(*b.circulator_midway == doctest::Approx(87.3).epsilon(0.005));
    CHECK(*b.rho == doctest::Approx(724).epsilon(0.005));
    CHECK(*b.mu_at_z == doctest::Approx(4.14e7).epsilon(0.01));
    CHECK(*b.mu_at_x == doctest::Approx(59.7).epsilon(0.005));
    CHECK(*b.measured_zcx_loss == doctest::Approx(58.4).epsilon(0.005));
  }

  TEST_CASE("one wavelength gives a budget without rho") {
    const Config cfg = parse_config(R"({"profiles": {"signal": {"wavelength_nm": 1536,
        "losses_db": {"X-Y": 0.9, "Y-Z": 2.6, "Z*": 51.7}}}})");
    const BudgetReport b = compute_budget(cfg);
    CHECK_FALSE(b.rho);
    CHECK(b.notices.size() == 1);
  }

  TEST_CASE("missing segment is named") {
    const Config cfg = parse_config(R"({"profiles": {"signal": {"wavelength_nm": 1536,
        "losses_db": {"X-Y": 0.9, "Z*": 51.7}}}})");
    try {
      compute_budget(cfg);
      FAIL("expected an exception");
    } catch (const std::out_of_range& e) {
      CHECK(std::string(e.what()).find("Y-Z") != std::string::npos);
    }
  }

  TEST_CASE("factors from the shipped config") {
    const Factors f = compute_factors(load_config(kDefault));
    CHECK(f.theta_l.value == doctest::Approx(0.294 * std::numbers::pi).epsilon(0.002));
    CHECK(f.nu.value == doctest::Approx(5.04).epsilon(0.005));
    CHECK(f.gamma.value == doctest::Approx(2.83e-6).epsilon(0.01));
    CHECK(f.delta0.value == doctest::Approx(1.03e-2).epsilon(0.02));
    CHECK(f.delta1.value == doctest::Approx(1.05e-3).epsilon(0.02));
    CHECK_FALSE(f.delta0.provenance.empty());
  }

  TEST_CASE("factors edge cases") {
    Config cfg = load_config(kDefault);
    cfg.afterpulse_attack->apc = 0.0;
    const Factors z = compute_factors(cfg);
    CHECK(z.delta0.value == 0.0);
    CHECK(z.delta1.value == 0.0);

    // Identical profiles: the circulator path set equal to the double pass.
    Config eq = load_config(kDefault);
    eq.attack = eq.signal;
    eq.passes_attack = eq.passes_signal;
    eq.attack->path_losses_db["Z-C*-X(best)"] = 51.7 + 2.6 + 0.9;
    CHECK(compute_factors(eq).rho.value == doctest::Approx(1.0));
    CHECK(compute_factors(eq).nu.value == doctest::Approx(1.0));

    Config missing = load_config(kDefault);
    missing.afterpulse_signal.reset();
    CHECK_THROWS_AS(compute_factors(missing), ConfigError);
  }

  TEST_CASE("detector scales per wavelength") {
    Config cfg = load_config(kDefault);
    auto [a0, a1] = detectors_for(cfg, AttackWavelength::attack);
    CHECK(a0.afterpulse_scale == doctest::Approx(1.03e-2).epsilon(0.02));
    CHECK(a1.afterpulse_scale == doctest::Approx(1.05e-3).epsilon(0.02));
    auto [s0, s1] = detectors_for(cfg, AttackWavelength::signal);
    CHECK(s0.afterpulse_scale == 1.0);
    CHECK(s1.afterpulse_scale == 1.0);
    cfg.delta0_override = 0.5;
    CHECK(detectors_for(cfg, AttackWavelength::attack).first.afterpulse_scale == 0.5);
  }

  TEST_CASE("combination angle and brightness per wavelength") {
    const Config cfg = load_config(kDefault);
    const auto l = combination_for(cfg, AttackWavelength::attack);
    const auto s = combination_for(cfg, AttackWavelength::signal);
    CHECK(l.readout_theta == doctest::Approx(0.294 * std::numbers::pi).epsilon(0.002));
    CHECK(s.readout_theta == doctest::Approx(std::numbers::pi));
    CHECK(s.readout_mu * compute_factors(cfg).nu.value == doctest::Approx(l.readout_mu));
    const auto g = grid_for(cfg, AttackWavelength::signal);
    CHECK(g.readout_theta == doctest::Approx(std::numbers::pi));
    CHECK(g.readout_mu.front() == doctest::Approx(s.readout_mu));
  }

  TEST_CASE("diagnostics name the line or field") {
    CHECK(error_of("{\n  \"frame\": {\n    \"n_slots\": 10,,\n  }\n}").find("line 3") != std::string::npos);
    CHECK(error_of(R"({"frame": {"n_slot": 10}})").find("frame") != std::string::npos);
    CHECK(error_of(R"({"frame": {"n_slot": 10}})").find("n_slot") != std::string::npos);
    CHECK(error_of(R"({"frame": {"n_slots": "ten"}})").find("frame.n_slots") != std::string::npos);
    CHECK(error_of(R"({"detectors": {"d0": {"traps": [{"amplitude": 1}]}}})").find("lifetime_s") !=
          std::string::npos);
    CHECK(error_of(R"({"attack": {"layout": "random"}})").find("layout") != std::string::npos);
    CHECK(error_of(R"({"simulation": {"frames": 0}})").find("frames") != std::string::npos);
    CHECK(error_of(R"({"grid": {"n_block": []}})").find("grid.n_block") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("grid axes accept numbers, lists and ranges") {
    const Config cfg = parse_config(R"({"grid": {"n_block": {"min": 400, "max": 440, "step": 20},
        "t_ll": [0.5, 0.7], "readout_mu": 30, "rate_tolerance": 0.1, "budget": 3}})");
    REQUIRE(cfg.grid);
    CHECK(cfg.grid->n_block == std::vector<int>{400, 420, 440});
    CHECK(cfg.grid->t_ll == std::vector<double>{0.5, 0.7});
    CHECK(cfg.grid->readout_mu == std::vector<double>{30});
    CHECK(*cfg.rate_tolerance == 0.1);
    CHECK(*cfg.budget == 3);
  }

  TEST_CASE("comments are allowed") {
    const Config cfg = parse_config("{\n  // frame only\n  \"frame\": {\"n_slots\": 100}\n}");
    CHECK(cfg.frame.n_slots == 100);
  }
}

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "thpsim/optics_budget.hpp"

using namespace thpsim;

namespace {

WavelengthProfile signal_profile() {
  WavelengthProfile p;
  p.name = "signal";
  p.wavelength_nm = 1536;
  p.v_half = 3.35;
  p.path_losses_db = {{"X-Y", 0.9}, {"Y-Z", 2.6}, {"Z*", 51.7}, {"X-D0", 8.8}, {"X-C-D1", 9.2}};
  return p;
}

WavelengthProfile attack_profile() {
  WavelengthProfile p;
  p.name = "attack";
  p.wavelength_nm = 1924;
  p.v_half = 5.7;
  p.path_losses_db = {{"X-Y", 3.6},           {"Y-Z", 23.0},           {"Z*", 51.7},
                      {"Z-C*-X(best)", 58.4}, {"Z-C*-X(worst)", 65.8}, {"X-D0", 15.5},
                      {"X-C-D1", 25.8}};
  return p;
}

}  // namespace

TEST_SUITE("optics_budget") {
  TEST_CASE("dB conversion") {
    CHECK(db_to_transmittance(0.0) == 1.0);
    CHECK(db_to_transmittance(3.6) == doctest::Approx(std::pow(10.0, -0.36)).epsilon(1e-12));
    CHECK(db_to_transmittance(3.6) == doctest::Approx(0.4365).epsilon(1e-3));
    CHECK(db_to_transmittance(58.7) == doctest::Approx(1.349e-6).epsilon(1e-3));
    CHECK_THROWS(db_to_transmittance(std::nan("")));
    CHECK_THROWS(db_to_transmittance(INFINITY));
  }

  TEST_CASE("dB round trip holds over 0..200 dB") {
    for (double l = 0.0; l <= 200.0; l += 0.37) {
      const double back = transmittance_to_db(db_to_transmittance(l));
      CHECK(std::abs(back - l) <= 1e-12 * std::max(1.0, l));
    }
  }

  TEST_CASE("photons per pulse") {
    const double h = 6.62607e-34, c = 2.99792e8;
    CHECK(mean_photons_per_pulse(21.55e-6, 5e6, 1924e-9) == doctest::Approx(4.14e7).epsilon(0.01));
    const double lambda = 1536e-9;
    CHECK(mean_photons_per_pulse(h * c / lambda, 1.0, lambda) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean_photons_per_pulse(1e-3, 1e6, 1536e-9) == doctest::Approx(7.73e9).epsilon(1e-3));
    CHECK_THROWS_AS(mean_photons_per_pulse(0.0, 1e6, 1536e-9), std::invalid_argument);
    CHECK_THROWS_AS(mean_photons_per_pulse(1e-3, -1.0, 1536e-9), std::invalid_argument);
  }

  TEST_CASE("count inversion") {
    CHECK(estimate_mu_from_counts({4.98e6, 323, 60, 8.85e-7}) == doctest::Approx(59.7).epsilon(0.005));
    CHECK(estimate_mu_from_counts({1e5, 42, 42, 0.3}) == 0.0);
    const PhotonCountRecord r{1e6, 1060, 60, 1e-3};
    const double exact = estimate_mu_from_counts(r);
    CHECK(exact == doctest::Approx(-std::log(1.0 - 1e-3) / 1e-3).epsilon(1e-12));
    CHECK(exact == doctest::Approx(1.0005).epsilon(1e-4));
    CHECK(estimate_mu_linear(r) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(estimate_mu_from_counts({100, 10, 20, 0.1}));   // n < d
    CHECK_THROWS(estimate_mu_from_counts({100, 120, 20, 0.1}));  // saturated
  }

  TEST_CASE("exact inversion is never below the linear estimate") {
    for (double n = 0; n < 9e5; n += 7919) {
      const PhotonCountRecord r{1e6, n + 10, 10, 0.05};
      CHECK(estimate_mu_from_counts(r) >= estimate_mu_linear(r));
    }
  }

  TEST_CASE("path losses") {
    const auto s = signal_profile();
    const auto l = attack_profile();
    CHECK(path_loss(s, double_pass_path()) == doctest::Approx(58.7).epsilon(1e-9));
    CHECK(path_loss(l, double_pass_path()) == doctest::Approx(104.9).epsilon(1e-9));
    CHECK(path_loss(l, circulator_path_best()) == doctest::Approx(85.0).epsilon(1e-9));
    CHECK(path_loss(l, circulator_path_worst()) == doctest::Approx(92.4).epsilon(1e-9));
  }

  TEST_CASE("path loss is a sum: order free and additive") {
    const auto l = attack_profile();
    CHECK(path_loss(l, {"X-Y", "Y-Z", "Z*"}) == doctest::Approx(path_loss(l, {"Z*", "X-Y", "Y-Z"})));
    CHECK(path_loss(l, {"X-Y", "Y-Z", "X-D0"}) ==
          doctest::Approx(path_loss(l, {"X-Y", "Y-Z"}) + path_loss(l, {"X-D0"})));
  }

  TEST_CASE("unknown segment names the segment") {
    const auto s = signal_profile();
    try {
      path_loss(s, circulator_path_best());
      FAIL("expected an exception");
    } catch (const std::out_of_range& e) {
      CHECK(std::string(e.what()).find("Z-C*-X(best)") != std::string::npos);
    }
  }

  TEST_CASE("segment names accept typographic dashes and stars") {
    CHECK(normalize_segment_name("X–Y") == "X-Y");
    CHECK(normalize_segment_name("Z–C★–X(best)") == "Z-C*-X(best)");
    CHECK(attack_profile().has("X\xE2\x80\x94" "C\xE2\x80\x94" "D1"));
  }

  TEST_CASE("profile validation") {
    auto p = attack_profile();
    CHECK_NOTHROW(p.validate());
    p.path_losses_db["Z-C*-X(worst)"] = 50.0;  // below best
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    auto q = signal_profile();
    q.path_losses_db["X-Y"] = -1.0;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  }

  TEST_CASE("midway polarization loss averages transmittance") {
    CHECK(midway_polarization_loss(85.0, 92.4) == doctest::Approx(87.3).epsilon(0.005));
    CHECK(midway_polarization_loss(40.0, 40.0) == doctest::Approx(40.0).epsilon(1e-12));
    const double t = 0.5 * (std::pow(10.0, -5.84) + std::pow(10.0, -6.58));
    CHECK(midway_polarization_loss(58.4, 65.8) == doctest::Approx(-10.0 * std::log10(t)).epsilon(1e-12));
    CHECK(midway_polarization_loss(58.4, 65.8) == doctest::Approx(60.68).epsilon(1e-4));
    CHECK_THROWS_AS(midway_polarization_loss(70.0, 60.0), std::invalid_argument);
  }

  TEST_CASE("rho") {
    CHECK(rho_factor(87.3, 58.7) == doctest::Approx(724).epsilon(0.5 / 724));
    CHECK(rho_factor(33.3, 33.3) == 1.0);
    CHECK(rho_factor(60, 50) == doctest::Approx(10.0).epsilon(1e-12));
    const double ab = rho_factor(71.2, 43.9), bc = rho_factor(43.9, 12.5), ac = rho_factor(71.2, 12.5);
    CHECK(ab * bc == doctest::Approx(ac).epsilon(1e-9));
  }
}

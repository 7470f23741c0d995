#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "thpsim/decay_fit.hpp"
#include "thpsim/detector_model.hpp"
#include "thpsim/histogram.hpp"

using namespace thpsim;

namespace {

const std::string kFixtures = THPSIM_DATA_DIR "/fixtures/";

// Per-trial first-click censoring: each trial walks the bins in order and
// stops at its first click.
CountHistogram censored_sample(const std::vector<double>& p, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CountHistogram h;
  h.bin_width_s = 0.4e-6;
  h.counts.assign(p.size(), 0.0);
  h.trials = trials;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (u(rng) < p[i]) {
        h.counts[i] += 1;
        break;
      }
    }
  }
  return h;
}

CountHistogram two_exp_poisson(double floor, double a1, double tau1, double a2, double tau2,
                               std::size_t bins, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CountHistogram h;
  h.bin_width_s = 0.4e-6;
  for (std::size_t i = 0; i < bins; ++i) {
    const double t = (i + 0.5) * h.bin_width_s;
    std::poisson_distribution<long> pois(floor + a1 * std::exp(-t / tau1) + a2 * std::exp(-t / tau2));
    h.counts.push_back(static_cast<double>(pois(rng)));
  }
  return h;
}

}  // namespace

TEST_SUITE("histogram") {
  TEST_CASE("csv reading") {
    std::istringstream in("# afterpulse scan\n# trials = 5000\nbin_start_s,counts\n0,10\n4e-7,7\n8e-7,3\n");
    const auto h = read_histogram_csv(in);
    CHECK(h.counts == std::vector<double>{10, 7, 3});
    CHECK(h.bin_width_s == doctest::Approx(4e-7));
    REQUIRE(h.trials);
    CHECK(*h.trials == 5000);

    std::istringstream no_header("0,1\n1,2\n");
    CHECK(read_histogram_csv(no_header).counts.size() == 2);
  }

  TEST_CASE("csv errors name the line") {
    auto message = [](const std::string& text) {
      std::istringstream in(text);
      try {
        read_histogram_csv(in);
      } catch (const std::runtime_error& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("bin_start_s,counts\n0,1\n1,abc\n").find("line 3") != std::string::npos);
    CHECK(message("bin_start_s,counts\n0,1\n1 2\n").find("line 3") != std::string::npos);
    CHECK(message("0,1\n1,-4\n").find("line 2") != std::string::npos);
    CHECK(message("0,1\n1,1\n5,1\n").find("evenly") != std::string::npos);
    CHECK_FALSE(message("0,1\n").empty());
    CHECK_THROWS(read_histogram_csv_file(kFixtures + "does_not_exist.csv"));
  }

  TEST_CASE("csv round trip") {
    CountHistogram h;
    h.bin_width_s = 0.4e-6;
    h.start_s = 0.0;
    h.counts = {240406, 166176, 0, 814, 815.5};
    h.trials = 1.56253e7;
    std::stringstream io;
    write_histogram_csv(io, h);
    const auto back = read_histogram_csv(io);
    CHECK(back.counts == h.counts);
    CHECK(back.bin_width_s == doctest::Approx(h.bin_width_s).epsilon(1e-6));
    CHECK(*back.trials == *h.trials);
  }

  TEST_CASE("saturation correction: two-bin censoring oracle") {
    const auto raw = censored_sample({0.3, 0.2}, 1000000, 3);
    CHECK(raw.counts[0] == doctest::Approx(300000).epsilon(0.01));
    CHECK(raw.counts[1] == doctest::Approx(140000).epsilon(0.01));
    const auto c = saturation_correct(raw);
    CHECK(c.counts[0] == raw.counts[0]);
    CHECK(c.counts[1] == doctest::Approx(200000).epsilon(0.01));
  }

  TEST_CASE("saturation correction inverts censoring within 2%") {
    std::vector<double> p;
    for (int i = 0; i < 40; ++i) p.push_back(0.25 * std::exp(-i / 5.0) + 0.004);
    const int trials = 100000;
    const auto raw = censored_sample(p, trials, 19);
    const auto c = saturation_correct(raw);
    double expected_total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double expected = trials * p[i];
      expected_total += expected;
      if (expected > 5000) CHECK(c.counts[i] == doctest::Approx(expected).epsilon(0.02));
    }
    CHECK(c.total() == doctest::Approx(expected_total).epsilon(0.02));
    CHECK(c.total() >= raw.total());
  }

  TEST_CASE("saturation correction edge cases") {
    CountHistogram h;
    h.bin_width_s = 1e-6;
    h.counts = {0, 0, 5, 3};
    CHECK_THROWS(saturation_correct(h));  // no trials
    h.trials = 100;
    const auto c = saturation_correct(h);
    CHECK(c.counts[2] == 5);
    CHECK(c.counts[3] == doctest::Approx(3 / 0.95));
    h.counts = {60, 50, 1};
    CHECK_THROWS(saturation_correct(h));  // running sum reaches the trials
  }

  TEST_CASE("split counts") {
    CountHistogram flat;
    flat.bin_width_s = 0.4e-6;
    flat.counts.assign(100, 50.0);
    const auto f = split_counts(flat, 50);
    CHECK(f.afterpulse == 0.0);
    CHECK(f.dark == doctest::Approx(5000));

    // 8e5 exponential counts on top of 2e5 flat counts.
    std::mt19937_64 rng(5);
    CountHistogram h;
    h.bin_width_s = 0.4e-6;
    h.counts.assign(200, 0.0);
    std::exponential_distribution<double> decay(1.0 / 2e-6);
    std::uniform_int_distribution<int> any(0, 199);
    for (int i = 0; i < 800000; ++i) {
      const auto bin = static_cast<std::size_t>(decay(rng) / h.bin_width_s);
      if (bin < 200) h.counts[bin] += 1;
    }
    for (int i = 0; i < 200000; ++i) h.counts[any(rng)] += 1;
    const auto s = split_counts(h, 100);
    CHECK(s.afterpulse == doctest::Approx(8e5).epsilon(0.02));
    CHECK(s.dark == doctest::Approx(2e5).epsilon(0.02));
    CHECK_FALSE(s.no_afterpulse_signal);

    CHECK_THROWS(split_counts(h, 195));  // tail shorter than kMinTailBins
    CHECK_THROWS(split_counts(h, 500));
  }

  TEST_CASE("tail above the mean flags missing afterpulse signal") {
    CountHistogram h;
    h.bin_width_s = 1e-6;
    h.counts.assign(40, 10.0);
    for (std::size_t i = 20; i < 40; ++i) h.counts[i] = 30.0;
    const auto s = split_counts(h, 20);
    CHECK(s.no_afterpulse_signal);
    CHECK(s.afterpulse == 0.0);
  }

  TEST_CASE("signal-wavelength fixture gives the measured split") {
    const auto h = read_histogram_csv_file(kFixtures + "afterpulse_1536.csv");
    CHECK(h.counts.size() == 200);
    const auto s = split_counts(h, 100);
    CHECK(s.afterpulse == doctest::Approx(867760).epsilon(1e-9));
    CHECK(s.dark == doctest::Approx(162854).epsilon(1e-9));
  }

  TEST_CASE("attack-wavelength fixture gives the measured split") {
    const auto h = read_histogram_csv_file(kFixtures + "afterpulse_1924.csv");
    const auto s = split_counts(h, 100);
    CHECK(s.afterpulse == doctest::Approx(44981).epsilon(1e-9));
    CHECK(s.dark == doctest::Approx(962140).epsilon(1e-9));
  }

  TEST_CASE("raw fixtures: censoring losses and corrected split") {
    struct Case {
      const char* file;
      double apc, dc, loss;
    };
    for (const Case& c : {Case{"afterpulse_1536_raw.csv", 867760, 162854, 0.064},
                          Case{"afterpulse_1924_raw.csv", 44981, 962140, 0.010}}) {
      CAPTURE(c.file);
      const auto raw = read_histogram_csv_file(kFixtures + c.file);
      REQUIRE(raw.trials);
      CHECK(raw.total() == doctest::Approx(1e6).epsilon(0.005));
      // Last bin is suppressed by the share of trials that already clicked.
      const double seen = raw.total() - raw.counts.back();
      CHECK(seen / *raw.trials == doctest::Approx(c.loss).epsilon(0.01));
      const auto corrected = saturation_correct(raw);
      CHECK(corrected.total() > raw.total());
      const auto s = split_counts(corrected, 100);
      CHECK(s.afterpulse == doctest::Approx(c.apc).epsilon(0.02));
      CHECK(s.dark == doctest::Approx(c.dc).epsilon(0.02));
    }
  }

  TEST_CASE("split and gamma do not change when both histograms are rescaled") {
    const auto hs = read_histogram_csv_file(kFixtures + "afterpulse_1536.csv");
    const auto hl = read_histogram_csv_file(kFixtures + "afterpulse_1924.csv");
    auto scaled = [](CountHistogram h, double k) {
      for (double& c : h.counts) c *= k;
      return h;
    };
    auto gamma_of = [](const CountHistogram& s, const CountHistogram& l) {
      const auto a = split_counts(s, 100);
      const auto b = split_counts(l, 100);
      return gamma_factor(a.afterpulse, a.dark, 2.68e4, b.afterpulse, b.dark, 8.32e7);
    };
    CHECK(gamma_of(scaled(hs, 3.7), scaled(hl, 0.2)) == doctest::Approx(gamma_of(hs, hl)).epsilon(1e-12));
  }

  TEST_CASE("expansion to gates") {
    CountHistogram h;
    h.bin_width_s = 0.4e-6;
    h.start_s = 0.0;
    h.counts = {10, 6};
    const auto g = expand_to_gates(h, 200e-9);
    CHECK(g.counts == std::vector<double>{5, 5, 3, 3});
    CHECK(g.bin_width_s == doctest::Approx(200e-9));
    CHECK(g.total() == h.total());
    CHECK_THROWS(expand_to_gates(h, 300e-9));
  }

  TEST_CASE("display normalization maps floor to 0 and peak to 1") {
    CountHistogram h;
    h.bin_width_s = 1e-6;
    h.counts = {110, 60, 20, 10, 10};
    const auto n = normalize_for_display(h, 10.0);
    CHECK(n[0] == doctest::Approx(1.0));
    CHECK(n[1] == doctest::Approx(0.5));
    CHECK(n[4] == doctest::Approx(0.0));
  }
}

TEST_SUITE("decay_fit") {
  TEST_CASE("recovers two lifetimes") {
    const auto h = two_exp_poisson(800.0, 2.5e5, 1.0e-6, 2.0e4, 5.0e-6, 200, 77);
    const auto fit = fit_two_exponential(h);
    CHECK(fit.converged);
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.components[0].amplitude == doctest::Approx(2.5e5).epsilon(0.05));
    CHECK(fit.components[0].lifetime_s == doctest::Approx(1.0e-6).epsilon(0.05));
    CHECK(fit.components[1].amplitude == doctest::Approx(2.0e4).epsilon(0.05));
    CHECK(fit.components[1].lifetime_s == doctest::Approx(5.0e-6).epsilon(0.05));
    CHECK(fit.floor == doctest::Approx(800).epsilon(0.01));
    CHECK(fit.residuals.size() == h.counts.size());
    // Poisson-weighted chi2 per degree of freedom near 1.
    CHECK(fit.chi2 / (h.counts.size() - 5) == doctest::Approx(1.0).epsilon(0.3));
  }

  TEST_CASE("fit starting after the first bins keeps amplitudes at t = 0") {
    const auto h = two_exp_poisson(5000.0, 1e6, 0.8e-6, 1e5, 6e-6, 150, 78);
    const auto fit = fit_two_exponential(h, 3);
    CHECK(fit.components[0].amplitude == doctest::Approx(1e6).epsilon(0.05));
    CHECK(fit.components[1].lifetime_s == doctest::Approx(6e-6).epsilon(0.05));
  }

  TEST_CASE("flat input is degenerate") {
    std::mt19937_64 rng(9);
    std::poisson_distribution<long> pois(700.0);
    CountHistogram h;
    h.bin_width_s = 0.4e-6;
    for (int i = 0; i < 200; ++i) h.counts.push_back(static_cast<double>(pois(rng)));
    const auto fit = fit_two_exponential(h);
    CHECK(fit.degenerate);
    // Noise only: whatever is attributed to afterpulsing is within counting error.
    CHECK(split_counts(h, 100).afterpulse <= 3 * std::sqrt(h.total()));
  }
}

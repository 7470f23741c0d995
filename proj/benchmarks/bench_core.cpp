#include <benchmark/benchmark.h>

#include "thpsim/attack_engine.hpp"
#include "thpsim/histogram.hpp"
#include "thpsim/phase_readout.hpp"

using namespace thpsim;

namespace {

std::pair<DetectorParams, DetectorParams> probe_detectors() {
  DetectorParams d0 = default_detector(), d1 = default_detector();
  d0.afterpulse_scale = 1.028e-2;
  d1.afterpulse_scale = 1.052e-3;
  return {d0, d1};
}

void bm_run_frame(benchmark::State& state) {
  const FrameConfig cfg;
  const auto [d0, d1] = probe_detectors();
  const FramePlan plan = build_frame_plan(reference_combination(0.92), cfg);
  RngStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(run_frame(cfg, plan, d0, d1, rng));
  state.SetItemsProcessed(state.iterations() * cfg.n_slots);
}
BENCHMARK(bm_run_frame);

void bm_run_simulation(benchmark::State& state) {
  const FrameConfig cfg;
  const auto [d0, d1] = probe_detectors();
  const FramePlan plan = build_frame_plan(reference_combination(0.92), cfg);
  SimOptions opt;
  opt.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(cfg, plan, d0, d1, 200, 3, opt));
}
BENCHMARK(bm_run_simulation)->Arg(1)->Arg(2);

void bm_build_frame_plan(benchmark::State& state) {
  const FrameConfig cfg;
  const auto combo = reference_combination(0.92);
  for (auto _ : state) benchmark::DoNotOptimize(build_frame_plan(combo, cfg));
}
BENCHMARK(bm_build_frame_plan);

void bm_readout_error_prob(benchmark::State& state) {
  double mu = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(readout_error_prob({mu, 0.92}));
    mu = mu < 50.0 ? mu * 1.01 : 1.0;
  }
}
BENCHMARK(bm_readout_error_prob);

void bm_afterpulse_prob(benchmark::State& state) {
  const auto d = default_detector();
  double t = 2e-7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(afterpulse_prob(d, t, kReferenceThpPhotons));
    t = t < 4e-5 ? t + 2e-7 : 2e-7;
  }
}
BENCHMARK(bm_afterpulse_prob);

void bm_saturation_correct(benchmark::State& state) {
  CountHistogram h;
  h.bin_width_s = 0.4e-6;
  h.trials = 1e7;
  for (int i = 0; i < 200; ++i) h.counts.push_back(1000.0 + 5e4 / (1 + i));
  for (auto _ : state) benchmark::DoNotOptimize(saturation_correct(h));
}
BENCHMARK(bm_saturation_correct);

}  // namespace
BENCHMARK_MAIN();

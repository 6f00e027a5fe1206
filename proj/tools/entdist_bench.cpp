// Benchmarks comparing the OpenMP slice-parallel simulation against the
// serial reference path, plus the coincidence matcher on realistic streams.

#include <benchmark/benchmark.h>

#include <vector>

#include "entdist/eventsim.hpp"
#include "entdist/quantum.hpp"
#include "entdist/timesync.hpp"

namespace {

entdist::SimConfig bench_config(bool parallel) {
    entdist::SimConfig cfg;
    cfg.t_start_s = 0.0;
    cfg.t_end_s = 10.0;
    cfg.slice_s = 0.25;
    cfg.pair_rate_hz = 2.0e6;
    cfg.state = entdist::make_werner(0.907);
    cfg.handedness_sign = -1;
    cfg.seed = 42;
    cfg.parallel = parallel;
    for (int st = 0; st < 2; ++st) {
        entdist::StationConfig& station = cfg.stations[st];
        for (entdist::DetectorParams& d : station.detectors) {
            d.efficiency = 1.0;
            d.dark_rate_hz = 10.0;
            d.background_rate_hz = 500.0;
            d.time_jitter_sigma_ps = 300.0;
        }
        station.qrng.decision_rate_hz = 5000.0;
        station.qrng.output_delay_min_s = 200e-9;
        station.qrng.output_delay_max_s = 200e-9;
        station.clock.offset_ps = (st == 0) ? 0.0 : 1.25e6;
        station.clock.drift_ps_per_s = (st == 0) ? 0.0 : 2.0;
        station.clock.sync_pulse_rate_hz = 10000.0;
        station.clock.sync_jitter_sigma_ps = 770.0;
        station.angles_rad = (st == 0) ? std::vector<double>{0.0, 0.7853981633974483}
                                       : std::vector<double>{0.39269908169872414,
                                                             1.1780972450961724};
        station.propagation_delay_ps = 0.0;
    }
    cfg.loss_t_s = {0.0};
    cfg.loss1_db = {28.0};
    cfg.loss2_db = {30.0};
    return cfg;
}

void bm_simulate_pass_serial(benchmark::State& state) {
    const entdist::SimConfig cfg = bench_config(false);
    for (auto _ : state) {
        benchmark::DoNotOptimize(entdist::simulate_pass(cfg));
    }
}

void bm_simulate_pass_parallel(benchmark::State& state) {
    const entdist::SimConfig cfg = bench_config(true);
    for (auto _ : state) {
        benchmark::DoNotOptimize(entdist::simulate_pass(cfg));
    }
}

void bm_match_coincidences(benchmark::State& state) {
    const entdist::DetectionResult result = entdist::simulate_pass(bench_config(true));
    const entdist::SyncFit fit =
        entdist::fit_clock(entdist::filter_sync_tags(result.tags1),
                           entdist::filter_sync_tags(result.tags2));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            entdist::match_coincidences(result.tags1, result.tags2, fit, 2500));
    }
}

}  // namespace

BENCHMARK(bm_simulate_pass_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_simulate_pass_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_match_coincidences)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

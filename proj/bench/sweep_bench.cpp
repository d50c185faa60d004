#include <benchmark/benchmark.h>

#include "qobs/sweep.hpp"

namespace {

qobs::SweepRange gain_range(int points) {
  qobs::SweepRange range{"gamma-l", {}};
  for (int i = 0; i < points; ++i) range.values.push_back(0.25 * i);
  return range;
}

qobs::ScenarioConfig base() {
  qobs::ScenarioConfig config;
  config.scenario = "observer";
  config.horizon = 10.0;
  config.step = 1e-3;
  return config;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto range = gain_range(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qobs::run_sweep_serial(base(), range));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto range = gain_range(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qobs::run_sweep_parallel(base(), range));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

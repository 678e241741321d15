#include <benchmark/benchmark.h>

#include "rpreg/simulation.hpp"

namespace {

rpreg::ScenarioSpec bench_spec() {
  rpreg::ScenarioSpec spec;
  spec.n = 100;
  spec.p = 100;
  spec.replications = 8;
  spec.seed = 42;
  spec.contamination = rpreg::Contamination::y_outliers();
  return spec;
}

const std::vector<rpreg::Method> kMethods{{0.0, rpreg::PenaltyFamily::SCAD, std::nullopt},
                                          {0.3, rpreg::PenaltyFamily::SCAD, std::nullopt}};

void BM_ScenarioSerial(benchmark::State& state) {
  const auto spec = bench_spec();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rpreg::run_scenario_serial(spec, kMethods));
  }
}
BENCHMARK(BM_ScenarioSerial)->Unit(benchmark::kMillisecond);

void BM_ScenarioParallel(benchmark::State& state) {
  const auto spec = bench_spec();
  rpreg::RunOptions options;
  options.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rpreg::run_scenario(spec, kMethods, options));
  }
}
BENCHMARK(BM_ScenarioParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SingleReplicate(benchmark::State& state) {
  const auto spec = bench_spec();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rpreg::run_replicate(spec, kMethods, 0, {}));
  }
}
BENCHMARK(BM_SingleReplicate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

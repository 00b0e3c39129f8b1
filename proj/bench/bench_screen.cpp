// Serial reference vs OpenMP screening kernel on simulation data.

#include <benchmark/benchmark.h>

#include "gofscreen/screening.hpp"
#include "gofscreen/simbench.hpp"

namespace {

using namespace gofscreen;

const SimData& poisson_data(std::size_t p) {
  static SimData cached = gen_dataset({5, 400, 1000, 7});
  if (cached.data.p() != p) cached = gen_dataset({5, 400, p, 7});
  return cached;
}

void BM_ScreenSerial(benchmark::State& state) {
  const auto& sim = poisson_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto result = screen_all_serial(sim.data, LossSpec::poisson(), 6);
    benchmark::DoNotOptimize(result.stats.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScreenParallel(benchmark::State& state) {
  const auto& sim = poisson_data(static_cast<std::size_t>(state.range(0)));
  const ParallelOptions parallel{static_cast<int>(state.range(1))};
  for (auto _ : state) {
    auto result = screen_all(sim.data, LossSpec::poisson(), 6, {}, parallel);
    benchmark::DoNotOptimize(result.stats.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QuantileScreen(benchmark::State& state) {
  static const SimData sim = gen_dataset({7, 400, 200, 7});
  for (auto _ : state) {
    auto result = screen_all(sim.data, LossSpec::quantile(0.75), 6);
    benchmark::DoNotOptimize(result.stats.data());
  }
  state.SetItemsProcessed(state.iterations() * 200);
}

}  // namespace

BENCHMARK(BM_ScreenSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScreenParallel)->Args({1000, 1})->Args({1000, 2})->Args({1000, 4})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuantileScreen)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

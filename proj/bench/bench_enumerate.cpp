#include <benchmark/benchmark.h>

#include "pspin/disorder.hpp"
#include "pspin/landscape.hpp"

namespace {

void BM_enumerate_reference(benchmark::State& state) {
  const auto G = pspin::sample_null(static_cast<int>(state.range(0)), pspin::MixtureSpec::pure(3), 1);
  for (auto _ : state) benchmark::DoNotOptimize(pspin::enumerate_reference(G));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}

void BM_enumerate(benchmark::State& state) {
  const auto G = pspin::sample_null(static_cast<int>(state.range(0)), pspin::MixtureSpec::pure(3), 1);
  for (auto _ : state) benchmark::DoNotOptimize(pspin::enumerate(G));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}

}  // namespace

BENCHMARK(BM_enumerate_reference)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_enumerate)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

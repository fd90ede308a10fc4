#include <benchmark/benchmark.h>
static void BM_placeholder(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(1);
}
BENCHMARK(BM_placeholder);
BENCHMARK_MAIN();

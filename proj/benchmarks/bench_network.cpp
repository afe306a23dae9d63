#include <benchmark/benchmark.h>

#include "ccopf/network.hpp"
#include "synthetic.hpp"

static void BM_Factor(benchmark::State& state) {
    const ccopf::GridCase g = bench::synthetic(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(ccopf::factor(g));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Factor)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_FactorEquilibrated(benchmark::State& state) {
    const ccopf::GridCase g = bench::synthetic(static_cast<int>(state.range(0)), 1);
    ccopf::FactorOptions o;
    o.equilibrate = true;
    for (auto _ : state) benchmark::DoNotOptimize(ccopf::factor(g, o));
}
BENCHMARK(BM_FactorEquilibrated)->Arg(1024)->Unit(benchmark::kMillisecond);

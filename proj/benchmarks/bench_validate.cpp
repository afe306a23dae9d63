#include <benchmark/benchmark.h>

#include "ccopf/cutting_plane.hpp"
#include "ccopf/validate.hpp"
#include "synthetic.hpp"

static void BM_MonteCarlo(benchmark::State& state) {
    const ccopf::NetworkFactors f = ccopf::factor(bench::bundled("case9w"));
    const ccopf::Dispatch d = ccopf::run_cutting_plane(f);
    ccopf::SimulationOptions o;
    o.samples = static_cast<std::size_t>(state.range(0));
    o.threads = static_cast<unsigned>(state.range(1));
    o.distribution = ccopf::WindDistribution::parse("t2.5");
    for (auto _ : state) benchmark::DoNotOptimize(ccopf::monte_carlo(d.control, f, o));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Args({100000, 1})->Args({100000, 4})->Unit(benchmark::kMillisecond);

static void BM_RealizedEpsilon(benchmark::State& state) {
    const ccopf::NetworkFactors f = ccopf::factor(bench::bundled("case9w"));
    const ccopf::Dispatch d = ccopf::run_cutting_plane(f);
    const ccopf::Vector mean = ccopf::Vector::Constant(2, 40.0), var = ccopf::Vector::Constant(2, 150.0);
    for (auto _ : state) benchmark::DoNotOptimize(ccopf::realized_epsilon(d.control, f, mean, var));
}
BENCHMARK(BM_RealizedEpsilon);

#include <benchmark/benchmark.h>

#include "ccopf/cutting_plane.hpp"
#include "ccopf/error.hpp"
#include "ccopf/robust.hpp"
#include "synthetic.hpp"

static void BM_StandardCase9w(benchmark::State& state) {
    const ccopf::NetworkFactors f = ccopf::factor(bench::bundled("case9w"));
    for (auto _ : state) benchmark::DoNotOptimize(ccopf::solve_standard_opf(f));
}
BENCHMARK(BM_StandardCase9w)->Unit(benchmark::kMillisecond);

static void BM_CuttingPlaneCase9w(benchmark::State& state) {
    const ccopf::NetworkFactors f = ccopf::factor(bench::bundled("case9w"));
    for (auto _ : state) benchmark::DoNotOptimize(ccopf::run_cutting_plane(f));
}
BENCHMARK(BM_CuttingPlaneCase9w)->Unit(benchmark::kMillisecond);

static void BM_CuttingPlaneSynthetic(benchmark::State& state) {
    const ccopf::NetworkFactors f = ccopf::factor(bench::synthetic(static_cast<int>(state.range(0)), 2));
    ccopf::CuttingPlaneOptions o;
    o.cuts_per_iter = static_cast<int>(state.range(1));
    int iterations = 0;
    for (auto _ : state) {
        try {
            iterations = ccopf::run_cutting_plane(f, o).report.iterations;
        } catch (const std::exception& e) {
            state.SkipWithError(e.what());
            break;
        }
    }
    state.counters["master_iterations"] = iterations;
}
BENCHMARK(BM_CuttingPlaneSynthetic)->Args({100, 1})->Args({100, 10})->Args({300, 10})->Unit(benchmark::kMillisecond);

static void BM_RobustCase9w(benchmark::State& state) {
    const ccopf::NetworkFactors f = ccopf::factor(bench::bundled("case9w"));
    const ccopf::RobustSets sets{ccopf::UncertaintySet(ccopf::BudgetSet{ccopf::Vector::Constant(2, 5.0), 1.0}),
                                 ccopf::UncertaintySet(ccopf::BudgetSet{ccopf::Vector::Constant(2, 45.0), 1.0})};
    for (auto _ : state) benchmark::DoNotOptimize(ccopf::run_robust_cutting_plane(f, sets));
}
BENCHMARK(BM_RobustCase9w)->Unit(benchmark::kMillisecond);

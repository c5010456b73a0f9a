#include <benchmark/benchmark.h>

#include <omp.h>

#include "ballistic/harness.h"
#include "ballistic/loss_tolerance.h"
#include "ballistic/multiplex.h"
#include "ballistic/percolation.h"

using namespace ballistic;

namespace {

// Argument 0 selects the serial path, otherwise the OpenMP default team.
int threads_for(const benchmark::State& state) { return state.range(0) == 0 ? 1 : omp_get_max_threads(); }

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) == 0 ? "serial" : "openmp x" + std::to_string(omp_get_max_threads()));
}

void BM_SquareCrossing(benchmark::State& state) {
    auto family = square_lattice_family(128);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_crossing(family, 0.5, 64, 1, 0, threads_for(state)));
    }
    label(state);
}
BENCHMARK(BM_SquareCrossing)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BlockMux(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(block_mux_monte_carlo(0.2, 3, 200000, 1, threads_for(state)));
    }
    label(state);
}
BENCHMARK(BM_BlockMux)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Teleport(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_teleport({50, 3, 0.1, 0}, 20000, 1, threads_for(state)));
    }
    label(state);
}
BENCHMARK(BM_Teleport)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_YieldCurve(benchmark::State& state) {
    YieldOptions o;
    o.bins = 20000;
    o.instances = 4;
    o.threads = threads_for(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(yield_curve(o));
    }
    label(state);
}
BENCHMARK(BM_YieldCurve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_WaferSpanTrials(benchmark::State& state) {
    ExperimentConfig c;
    c.scenario = "wafer-span";
    c.trials = 8;
    c.params = {{"nz", 20}};
    c.validate();
    c.threads = threads_for(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_experiment(c));
    }
    label(state);
}
BENCHMARK(BM_WaferSpanTrials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

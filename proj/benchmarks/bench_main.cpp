#include <benchmark/benchmark.h>

#include "holemem/atomic_dynamics.hpp"
#include "holemem/oracle.hpp"
#include "holemem/photon_stats.hpp"
#include "holemem/propagation.hpp"
#include "holemem/units.hpp"

using namespace holemem;

namespace {

const HoleProfile profile{230.0, 3.0, 8.7, 2.1};

void BM_Rk4PerturbativeCell(benchmark::State& state) {
    complex ce{}, cs{};
    const complex e{1e-3, 0.0}, om{2.0, 0.0};
    for (auto _ : state) {
        detail::rk4_perturbative(ce, cs, e, e, e, om, om, om, 0.7, 0.01);
        benchmark::DoNotOptimize(ce);
        benchmark::DoNotOptimize(cs);
    }
}
BENCHMARK(BM_Rk4PerturbativeCell);

void BM_Rk4FullStep(benchmark::State& state) {
    AtomicState s{};
    const DriveSample d{complex(0.3, 0.1), complex(2.0, 0.0), 0.7};
    for (auto _ : state) {
        s = rk4_step(s, d, d, d, 0.01, Mode::full);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_Rk4FullStep);

// Slow-light pulse through n_z slices and n_detuning bins.
void BM_Propagate(benchmark::State& state) {
    const TimeGrid grid(0.0, 20.0, 0.01);
    const auto input = make_gaussian_pulse(3.0, 7.0, 1e-3, grid);
    const ComplexEnvelope raman(grid);
    const PropagationGrids grids{DetuningGrid::from_span_mhz(6.0, static_cast<std::size_t>(state.range(1))),
                                 static_cast<std::size_t>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(propagate(input, raman, profile, grids));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.count()) * state.range(0));
}
BENCHMARK(BM_Propagate)->Args({25, 300})->Args({50, 600})->Unit(benchmark::kMillisecond);

void BM_HilbertG(benchmark::State& state) {
    double w = 0.0;
    for (auto _ : state) {
        w = w > 10.0 ? 0.013 : w + 0.37;
        benchmark::DoNotOptimize(hilbert_g(w, profile));
    }
}
BENCHMARK(BM_HilbertG);

void BM_MonteCarloCounts(benchmark::State& state) {
    MonteCarloSpec spec;
    spec.signal_mean = 0.297;
    spec.noise_mean = 9e-3;
    spec.trials = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_counts(spec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloCounts)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

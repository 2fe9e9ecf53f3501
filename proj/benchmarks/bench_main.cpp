#include <benchmark/benchmark.h>

#include <random>

#include "mmvlab/closed_form.hpp"
#include "mmvlab/mmv_discrete.hpp"
#include "mmvlab/sde_engine.hpp"
#include "mmvlab/verifier.hpp"

namespace {

void BM_Waterfill(benchmark::State& state) {
    const auto x = mmv::DiscreteRv::uniform(10.0, 22.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mmv::mmv_waterfill(x, 2.0).value);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Waterfill)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity();

void BM_Truncation(benchmark::State& state) {
    const auto x = mmv::DiscreteRv::uniform(10.0, 22.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mmv::mmv_truncation(x, 2.0).value);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Truncation)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity();

void BM_ClosedFormValue(benchmark::State& state) {
    const auto cfg = mmv::baseline_config();
    for (auto _ : state) benchmark::DoNotOptimize(mmv::mmv_value(cfg));
}
BENCHMARK(BM_ClosedFormValue);

void BM_HjbiScan(benchmark::State& state) {
    const auto cfg = mmv::baseline_config();
    const auto grids = mmv::default_scan_grids();
    for (auto _ : state) benchmark::DoNotOptimize(mmv::hjbi_scan(cfg, grids).passed());
}
BENCHMARK(BM_HjbiScan)->Unit(benchmark::kMillisecond);

// One equilibrium path per iteration; the argument is 1/dt.
void BM_EquilibriumPath(benchmark::State& state) {
    const auto cfg = mmv::baseline_config();
    const auto eq = mmv::equilibrium_strategy(cfg);
    const double dt = 1.0 / static_cast<double>(state.range(0));
    const std::size_t n = mmv::uniform_steps(cfg.horizon, dt);
    mmv::PathNoise noise;
    std::uint64_t i = 0;
    for (auto _ : state) {
        noise.fill(cfg, 1, i++, n, mmv::ClaimDynamics::compound_poisson);
        benchmark::DoNotOptimize(
            mmv::simulate_terminal(cfg, eq, noise, 1, mmv::ClaimDynamics::compound_poisson).x);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_EquilibriumPath)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "lppl/lppl.hpp"

namespace {

lppl::PriceSeries trace(std::size_t n) {
    lppl::SynthSpec spec = lppl::preset_spec(lppl::Preset::base, 1);
    spec.n = n;
    spec.params.T = 1.1 * static_cast<double>(n);
    return lppl::generate_trace(spec);
}

void BM_EvaluateBatch(benchmark::State& state) {
    const auto series = trace(static_cast<std::size_t>(state.range(0)));
    const lppl::LpplParams p{5.0, 0.02, 1.1 * static_cast<double>(series.size()), 0.68, 0.05, 9.0, 0.0};
    const auto threads = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(lppl::evaluate_batch(p, series, threads));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvaluateBatch)
    ->ArgsProduct({{1000, 100000}, {1, 2, 4, 8}})
    ->ArgNames({"n", "threads"})
    ->UseRealTime()
    ->Unit(benchmark::kMicrosecond);

void BM_LmFit(benchmark::State& state) {
    const auto series = trace(1000);
    const lppl::LpplParams seed{5.05, 0.0198, 1111.0, 0.673, 0.0505, 8.91, 0.1};
    lppl::LmConfig config;
    config.max_iterations = 50;
    const auto threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(lppl::lm_fit(series, seed, config, threads));
}
BENCHMARK(BM_LmFit)->Arg(1)->Arg(4)->ArgName("threads")->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_InterleaveFit(benchmark::State& state) {
    const auto series = trace(1000);
    const lppl::LpplParams seed{5.05, 0.0198, 1111.0, 0.673, 0.0505, 8.91, 0.1};
    lppl::InterleaveConfig config;
    config.max_total_iterations = 200;
    for (auto _ : state) benchmark::DoNotOptimize(lppl::interleave_fit(series, seed, config));
}
BENCHMARK(BM_InterleaveFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

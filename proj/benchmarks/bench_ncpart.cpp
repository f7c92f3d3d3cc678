#include <rlab/ncpart.hpp>

#include <benchmark/benchmark.h>

static void BM_EnumerateNcp(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(rlab::enumerate_ncp(k));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rlab::catalan(k)));
}
BENCHMARK(BM_EnumerateNcp)->DenseRange(4, 10, 2);

static void BM_EnumerateNcg(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(rlab::enumerate_ncg(k));
}
BENCHMARK(BM_EnumerateNcg)->DenseRange(3, 7, 1);

static void BM_Kreweras(benchmark::State& state) {
    const auto parts = rlab::enumerate_ncp(static_cast<int>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rlab::kreweras(parts[i]));
        i = (i + 1) % parts.size();
    }
}
BENCHMARK(BM_Kreweras)->Arg(6)->Arg(8);

#include <rlab/ensemble.hpp>
#include <rlab/mchain.hpp>

#include <benchmark/benchmark.h>

#include <vector>

using rlab::CMatrix;
using rlab::SpectralKernel;

static void BM_SampleWigner(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(rlab::sample_wigner(N, 1, rlab::Dist::gaussian, seed++));
}
BENCHMARK(BM_SampleWigner)->Arg(256)->Arg(512);

static void BM_Eigendecomposition(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const int beta = static_cast<int>(state.range(1));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto s = rlab::sample_wigner(N, beta, rlab::Dist::gaussian, seed++);
        s.ensure_eigen(true);
        benchmark::DoNotOptimize(s.lambda(0));
    }
}
BENCHMARK(BM_Eigendecomposition)->Args({256, 1})->Args({512, 1})->Args({256, 2});

static void BM_ChainEvaluatorSetup(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    auto s = rlab::sample_wigner(N, 1, rlab::Dist::gaussian, 3);
    s.ensure_eigen(true);
    const auto B = rlab::make_observables(N, rlab::Recipe::random_hermitian_traceless, 5).primary;
    std::vector<CMatrix> mats{B, B};
    for (auto _ : state) benchmark::DoNotOptimize(rlab::ChainEvaluator(s, mats));
}
BENCHMARK(BM_ChainEvaluatorSetup)->Arg(256)->Arg(512);

static void BM_ChainAvgPerPoint(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    auto s = rlab::sample_wigner(N, 1, rlab::Dist::gaussian, 3);
    s.ensure_eigen(true);
    const auto B = rlab::make_observables(N, rlab::Recipe::random_hermitian_traceless, 5).primary;
    std::vector<CMatrix> mats{B, B};
    rlab::ChainEvaluator ev(s, mats);
    std::vector<SpectralKernel> ks{SpectralKernel::resolvent({0.0, 0.1}),
                                   SpectralKernel::resolvent({0.0, -0.1})};
    for (auto _ : state) benchmark::DoNotOptimize(ev.avg(ks));
}
BENCHMARK(BM_ChainAvgPerPoint)->Arg(256)->Arg(512)->Arg(1024);

static void BM_Heisenberg(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    auto s = rlab::sample_wigner(N, 1, rlab::Dist::gaussian, 3);
    s.ensure_eigen(true);
    const auto B = rlab::make_observables(N, rlab::Recipe::random_hermitian_traceless, 5).primary;
    std::vector<CMatrix> mats{B, B};
    rlab::ChainEvaluator ev(s, mats);
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ev.heisenberg(t));
        t += 0.125;
    }
}
BENCHMARK(BM_Heisenberg)->Arg(256)->Arg(512);

BENCHMARK_MAIN();

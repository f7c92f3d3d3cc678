#include <rlab/mchain.hpp>
#include <rlab/rng.hpp>
#include <rlab/semicircle.hpp>

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

using rlab::ChainSpec;
using rlab::CMatrix;
using rlab::Complex;
using rlab::SpectralKernel;

namespace {

CMatrix random_hermitian(rlab::Rng& rng, int N) {
    CMatrix B(N, N);
    for (int i = 0; i < N; ++i) {
        B(i, i) = Complex{rng.next_normal(), 0.0};
        for (int j = i + 1; j < N; ++j) {
            B(i, j) = Complex{rng.next_normal(), rng.next_normal()};
            B(j, i) = std::conj(B(i, j));
        }
    }
    return B / rlab::spectral_norm_estimate(B);
}

ChainSpec make_chain(int k, int N) {
    rlab::Rng rng(7 + static_cast<std::uint64_t>(k));
    std::vector<SpectralKernel> ks;
    for (int j = 0; j < k; ++j)
        ks.push_back(SpectralKernel::resolvent({0.3 * j - 0.5, j % 2 ? -0.4 : 0.6}));
    std::vector<CMatrix> mats;
    for (int i = 0; i + 1 < k; ++i) mats.push_back(random_hermitian(rng, N));
    return ChainSpec::make(std::move(ks), std::move(mats), N);
}

} // namespace

static void BM_MMatrix(benchmark::State& state) {
    const auto chain = make_chain(static_cast<int>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(rlab::m_matrix(chain));
}
BENCHMARK(BM_MMatrix)->DenseRange(2, 6, 1);

static void BM_MMatrixQ(benchmark::State& state) {
    const auto chain = make_chain(static_cast<int>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(rlab::m_matrix_q(chain));
}
BENCHMARK(BM_MMatrixQ)->DenseRange(2, 6, 1);

static void BM_DividedDifference(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::vector<Complex> zs;
    for (int i = 0; i < n; ++i) zs.push_back({0.2 * i - 0.4, i % 2 ? -0.3 : 0.5});
    for (auto _ : state) benchmark::DoNotOptimize(rlab::divided_difference(zs));
}
BENCHMARK(BM_DividedDifference)->DenseRange(2, 7, 1);

static void BM_MBound(benchmark::State& state) {
    const auto chain = make_chain(static_cast<int>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(rlab::m_bound(chain));
}
BENCHMARK(BM_MBound)->Arg(3)->Arg(5);

// Independent reference implementations used to pin the fast library routines.
// Everything here is deliberately brute force.
#pragma once

#include <rlab/ncpart.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// all set partitions of [k] via restricted growth strings
inline std::vector<std::vector<std::vector<int>>> all_partitions(int k) {
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<int> rgs(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int i, int max_used) {
        if (i == k) {
            int nb = max_used + 1;
            std::vector<std::vector<int>> blocks(static_cast<std::size_t>(nb));
            for (int e = 0; e < k; ++e)
                blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(e)])].push_back(e + 1);
            out.push_back(std::move(blocks));
            return;
        }
        for (int b = 0; b <= max_used + 1; ++b) {
            rgs[static_cast<std::size_t>(i)] = b;
            rec(i + 1, std::max(max_used, b));
        }
    };
    if (k > 0) rec(0, -1);
    return out;
}

// no a < c < b < d with {a,b} and {c,d} in different blocks
inline bool blocks_noncrossing(const std::vector<std::vector<int>>& blocks) {
    const auto n = blocks.size();
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            for (int a : blocks[p])
                for (int b : blocks[p])
                    for (int c : blocks[q])
                        for (int d : blocks[q])
                            if (a < c && c < b && b < d) return false;
        }
    return true;
}

inline std::vector<rlab::Partition> ncp_by_filter(int k) {
    std::vector<rlab::Partition> out;
    for (auto& blocks : all_partitions(k))
        if (blocks_noncrossing(blocks)) out.push_back(rlab::Partition::from_blocks(k, blocks));
    std::sort(out.begin(), out.end());
    return out;
}

// Kreweras complement by brute force: interleave 1,1',2,2',...,k,k' on a
// circle and take the coarsest partition of the primed copies whose union
// with pi stays non-crossing.
inline rlab::Partition kreweras_by_search(const rlab::Partition& pi) {
    const int k = pi.k;
    // combined circle positions: element i -> 2i-1, primed i -> 2i
    auto combined_ok = [&](const std::vector<std::vector<int>>& sigma) {
        std::vector<std::vector<int>> both;
        for (const auto& blk : pi.blocks) {
            std::vector<int> b;
            for (int e : blk) b.push_back(2 * e - 1);
            both.push_back(std::move(b));
        }
        for (const auto& blk : sigma) {
            std::vector<int> b;
            for (int e : blk) b.push_back(2 * e);
            both.push_back(std::move(b));
        }
        return blocks_noncrossing(both);
    };
    std::vector<std::vector<std::vector<int>>> best;
    std::size_t best_blocks = static_cast<std::size_t>(k) + 1;
    for (auto& sigma : all_partitions(k)) {
        if (!combined_ok(sigma)) continue;
        if (sigma.size() < best_blocks) {
            best_blocks = sigma.size();
            best.clear();
        }
        if (sigma.size() == best_blocks) best.push_back(sigma);
    }
    if (best.size() != 1) throw std::runtime_error("kreweras oracle: complement not unique");
    return rlab::Partition::from_blocks(k, best.front());
}

// all graphs on [k] whose chord diagrams have no crossing edge pair
inline std::vector<std::vector<std::pair<int, int>>> ncg_by_filter(int k) {
    std::vector<std::pair<int, int>> all_edges;
    for (int i = 1; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j) all_edges.emplace_back(i, j);
    const auto m = all_edges.size();
    std::vector<std::vector<std::pair<int, int>>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<std::pair<int, int>> edges;
        for (std::size_t e = 0; e < m; ++e)
            if (mask >> e & 1) edges.push_back(all_edges[e]);
        bool ok = true;
        for (std::size_t p = 0; p < edges.size() && ok; ++p)
            for (std::size_t q = p + 1; q < edges.size() && ok; ++q) {
                auto [a, b] = edges[p];
                auto [c, d] = edges[q];
                if ((a < c && c < b && b < d) || (c < a && a < d && d < b)) ok = false;
            }
        if (ok) out.push_back(std::move(edges));
    }
    return out;
}

inline std::uint64_t catalan_by_binomial(int n) {
    // C_n = binom(2n, n) / (n + 1), built up without overflow for n <= 30
    long double b = 1.0L;
    for (int i = 1; i <= n; ++i) b = b * static_cast<long double>(n + i) / static_cast<long double>(i);
    return static_cast<std::uint64_t>(std::llroundl(b / static_cast<long double>(n + 1)));
}

// composite Simpson on [0, pi] after x = 2 cos(theta); integrands are smooth
// in theta, so this converges fast and shares nothing with the library's
// Gauss-Legendre machinery
template <class F>
std::complex<double> sc_simpson(F&& f, int panels = 40000) {
    const double pi = 3.14159265358979323846;
    const double h = pi / (2 * panels);
    std::complex<double> acc = 0.0;
    auto g = [&](double th) {
        const double x = 2.0 * std::cos(th);
        const double rho = 2.0 * std::sin(th) * std::sin(th) / pi; // rho_sc(x) * |dx/dth|
        return rho * f(x);
    };
    for (int i = 0; i < 2 * panels; i += 2)
        acc += g(i * h) + 4.0 * g((i + 1) * h) + g((i + 2) * h);
    return acc * (h / 3.0);
}

inline std::complex<double> stieltjes_simpson(std::complex<double> z) {
    return sc_simpson([z](double x) { return 1.0 / (x - z); });
}

inline std::complex<double> dd_simpson(const std::vector<std::complex<double>>& zs) {
    return sc_simpson([&zs](double x) {
        std::complex<double> p = 1.0;
        for (auto z : zs) p /= (x - z);
        return p;
    });
}

inline double phi_simpson(double s) {
    return sc_simpson([s](double x) { return std::cos(s * x); }).real();
}

// Bessel route: phi(s) = J_1(2s)/s = sum_m (-1)^m s^(2m) / (m! (m+1)!)
inline double phi_series(double s) {
    long double term = 1.0L, acc = 1.0L;
    const long double s2 = static_cast<long double>(s) * s;
    for (int m = 1; m < 80; ++m) {
        term *= -s2 / (static_cast<long double>(m) * (m + 1));
        acc += term;
        if (std::abs(static_cast<double>(term)) < 1e-20 * std::abs(static_cast<double>(acc))) break;
    }
    return static_cast<double>(acc);
}

} // namespace oracle

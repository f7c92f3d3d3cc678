#include <rlab/errors.hpp>
#include <rlab/ncpart.hpp>
#include <rlab/quadrature.hpp>
#include <rlab/rng.hpp>
#include <rlab/semicircle.hpp>

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "support/oracles.hpp"

using rlab::Complex;
using doctest::Approx;

namespace {

double rel(Complex got, Complex want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// resum cumulants over NCP(B); independent check of the implicit definition
Complex resum(const rlab::MomentFn& moment, const std::vector<int>& B) {
    Complex acc = 0.0;
    for (const auto& pi : rlab::enumerate_ncp(static_cast<int>(B.size()))) {
        Complex term = 1.0;
        for (const auto& blk : pi.blocks) {
            std::vector<int> sub;
            for (int e : blk) sub.push_back(B[static_cast<std::size_t>(e - 1)]);
            term *= rlab::free_cumulant(moment, sub);
        }
        acc += term;
    }
    return acc;
}

} // namespace

TEST_SUITE("semicircle") {

TEST_CASE("stieltjes against quadrature oracle") {
    // Simpson oracle is reliable for eta not too small
    for (double re : {-3.0, -1.7, -0.4, 0.0, 0.9, 2.8})
        for (double im : {0.05, 0.3, 1.0, -0.5, -2.0}) {
            const Complex z{re, im};
            CHECK(rel(rlab::stieltjes(z), oracle::stieltjes_simpson(z)) < 1e-9);
        }
}

TEST_CASE("stieltjes solves its quadratic on the right branch") {
    rlab::Rng rng(41);
    for (int t = 0; t < 500; ++t) {
        const Complex z{6.0 * rng.next_double() - 3.0,
                        (rng.next_double() < 0.5 ? 1.0 : -1.0) * std::pow(10.0, -4.0 * rng.next_double())};
        const Complex m = rlab::stieltjes(z);
        CHECK(std::abs(m * m + z * m + 1.0) < 1e-16 * (1.0 + std::abs(z)) / std::abs(z.imag()) + 1e-12);
        CHECK(m.imag() * z.imag() > 0.0);
        CHECK(std::abs(m) < 1.0 + 1e-12);
    }
}

TEST_CASE("stieltjes known values") {
    // m(i) = (-i + i sqrt(5))/2: purely imaginary
    const Complex mi = rlab::stieltjes({0.0, 1.0});
    CHECK(mi.real() == Approx(0.0).epsilon(1e-15));
    CHECK(mi.imag() == Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));
    // real z outside the bulk: m(3) = (-3 + sqrt(5))/2
    CHECK(rlab::stieltjes({3.0, 0.0}).real() == Approx((-3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
    CHECK(rlab::stieltjes({3.0, 0.0}).imag() == Approx(0.0));
    CHECK_THROWS_AS(rlab::stieltjes({1.0, 0.0}), rlab::ValidationError);
    CHECK_THROWS_AS(rlab::stieltjes({2e6, 1.0}), rlab::ValidationError);
}

TEST_CASE("stieltjes conjugation symmetry") {
    rlab::Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        const Complex z{4.0 * rng.next_double() - 2.0, 2.0 * rng.next_double() + 1e-4};
        CHECK(rlab::stieltjes(std::conj(z)) == std::conj(rlab::stieltjes(z)));
    }
}

TEST_CASE("density normalization and endpoints") {
    CHECK(rlab::rho(0.0) == Approx(1.0 / 3.14159265358979323846).epsilon(1e-15));
    CHECK(rlab::rho(2.0) == 0.0);
    CHECK(rlab::rho(-2.0) == 0.0);
    CHECK(rlab::rho(2.5) == 0.0);
    const Complex total = rlab::sc_integral([](double) { return Complex{1.0, 0.0}; }, 1e-12);
    CHECK(total.real() == Approx(1.0).epsilon(1e-11));
    // second moment = Catalan(1) = 1, fourth = Catalan(2) = 2
    CHECK(rlab::sc_integral([](double x) { return Complex{x * x, 0.0}; }, 1e-12).real() ==
          Approx(1.0).epsilon(1e-11));
    CHECK(rlab::sc_integral([](double x) { return Complex{x * x * x * x, 0.0}; }, 1e-12).real() ==
          Approx(2.0).epsilon(1e-11));
}

TEST_CASE("derivatives match finite differences") {
    const Complex z{0.7, 0.35};
    const auto d = rlab::stieltjes_derivatives(z, 4);
    CHECK(d[0] == rlab::stieltjes(z));
    const double h = 1e-6;
    for (int j = 1; j <= 2; ++j) {
        const Complex num =
            (rlab::stieltjes_derivatives(z + Complex{h, 0.0}, j - 1)[j - 1] -
             rlab::stieltjes_derivatives(z - Complex{h, 0.0}, j - 1)[j - 1]) /
            (2.0 * h);
        CHECK(rel(d[static_cast<std::size_t>(j)], num) < 1e-8);
    }
    // m' = m^2 / (1 - m^2) from the quadratic
    const Complex m = d[0];
    CHECK(rel(d[1], m * m / (1.0 - m * m)) < 1e-14);
}

TEST_CASE("divided difference: distinct points vs quadrature oracle") {
    rlab::Rng rng(11);
    for (int t = 0; t < 40; ++t) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        std::vector<Complex> zs;
        for (int i = 0; i < n; ++i)
            zs.push_back({3.0 * rng.next_double() - 1.5, 0.3 + 1.5 * rng.next_double()});
        CHECK(rel(rlab::divided_difference(zs), oracle::dd_simpson(zs)) < 1e-8);
    }
}

TEST_CASE("divided difference: first order closed form") {
    const Complex z1{0.3, 0.7}, z2{-0.8, 0.2};
    const std::vector<Complex> zs{z1, z2};
    const Complex want = (rlab::stieltjes(z1) - rlab::stieltjes(z2)) / (z1 - z2);
    CHECK(rel(rlab::divided_difference(zs), want) < 1e-13);
}

TEST_CASE("divided difference: confluent limit equals derivative") {
    const Complex z{0.4, 0.6};
    const std::vector<Complex> zs{z, z, z};
    // m[z,z,z] = m''(z)/2!
    const auto d = rlab::stieltjes_derivatives(z, 2);
    CHECK(rel(rlab::divided_difference(zs), d[2] / 2.0) < 1e-12);
}

TEST_CASE("divided difference: symmetric under permutation") {
    std::vector<Complex> zs{{0.1, 0.5}, {-0.6, 1.1}, {1.2, 0.4}, {0.0, -0.8}};
    const Complex base = rlab::divided_difference(zs);
    std::swap(zs[0], zs[3]);
    std::swap(zs[1], zs[2]);
    CHECK(rel(rlab::divided_difference(zs), base) < 1e-12);
}

TEST_CASE("divided difference: near-coincident pair crosses the route switch") {
    // gap just above and below tau_dd = 1e-3 * min eta; both routes must agree
    const double eta = 0.5;
    for (double gap : {2e-3 * eta, 0.5e-3 * eta}) {
        const std::vector<Complex> zs{{0.2, eta}, {0.2 + gap, eta}, {-0.9, 0.7}};
        CHECK(rel(rlab::divided_difference(zs), oracle::dd_simpson(zs)) < 1e-8);
    }
}

TEST_CASE("divided difference bound") {
    // |m[z_1..z_j]| <= 10 / eta^(j-1) with eta = min |Im z_i|
    rlab::Rng rng(23);
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 5);
        double eta_min = 1e9;
        std::vector<Complex> zs;
        for (int i = 0; i < n; ++i) {
            const double eta = 0.05 + rng.next_double();
            const double sign = rng.next_double() < 0.5 ? 1.0 : -1.0;
            zs.push_back({4.0 * rng.next_double() - 2.0, sign * eta});
            eta_min = std::min(eta_min, eta);
        }
        CHECK(std::abs(rlab::divided_difference(zs)) <= 10.0 / std::pow(eta_min, n - 1));
    }
}

TEST_CASE("sc_moment of resolvents is the divided difference") {
    const std::vector<Complex> zs{{0.5, 0.8}, {-0.3, 1.2}, {0.9, -0.6}};
    std::vector<rlab::SpectralKernel> ks;
    for (auto z : zs) ks.push_back(rlab::SpectralKernel::resolvent(z));
    CHECK(rel(rlab::sc_moment(ks), rlab::divided_difference(zs)) < 1e-12);
}

TEST_CASE("sc_moment with absolute kernels") {
    // <|x - z|^{-2}> = Im m / eta at z by Ward on the continuum
    const Complex z{0.4, 0.55};
    std::vector<rlab::SpectralKernel> ks{rlab::SpectralKernel::absolute(z),
                                         rlab::SpectralKernel::absolute(z)};
    const Complex want = rlab::stieltjes(z).imag() / z.imag();
    CHECK(rel(rlab::sc_moment(ks), want) < 1e-9);
}

TEST_CASE("function moments") {
    // shift f by a constant so the target is nonzero (an exactly-zero
    // integral starves the relative-tolerance stopping rule)
    std::vector<rlab::FunctionKernel> shifted{{[](double x) { return Complex{x + 3.0, 0.0}; }, 8}};
    CHECK(rlab::sc_function_moment(shifted).real() == Approx(3.0).epsilon(1e-10));
    std::vector<rlab::FunctionKernel> two{{[](double x) { return Complex{x, 0.0}; }, 8},
                                          {[](double x) { return Complex{x, 0.0}; }, 8}};
    CHECK(rlab::sc_function_moment(two).real() == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("phi profile") {
    CHECK(rlab::phi(0.0) == 1.0);
    for (double s : {0.1, 0.5, 1.0, 2.0, 4.0, 7.0, 10.0}) {
        CHECK(rlab::phi(s) == Approx(oracle::phi_series(s)).epsilon(1e-9));
        CHECK(rlab::phi(s) == Approx(oracle::phi_simpson(s)).epsilon(1e-9));
        CHECK_THROWS_AS(rlab::phi(-s), rlab::ValidationError);
    }
    // decay envelope |phi(s)| <= 1/s^{3/2} for large s (Bessel asymptotics)
    for (double s : {5.0, 8.0, 12.0}) CHECK(std::abs(rlab::phi(s)) < 1.0 / std::pow(s, 1.5));
}

TEST_CASE("free cumulants: round trip on random moments") {
    rlab::Rng rng(2024);
    // arbitrary complex "moments" keyed by subset content
    auto moment = [&](std::span<const int> B) {
        std::uint64_t h = 1469598103934665603ull;
        for (int e : B) h = (h ^ static_cast<std::uint64_t>(e)) * 1099511628211ull;
        rlab::Rng local(h);
        return Complex{2.0 * local.next_double() - 1.0, 2.0 * local.next_double() - 1.0};
    };
    for (int n = 1; n <= 6; ++n) {
        std::vector<int> B;
        for (int i = 0; i < n; ++i) B.push_back(10 + 3 * i);
        CHECK(std::abs(resum(moment, B) - moment(B)) < 1e-12);
    }
}

TEST_CASE("free cumulants: recursion equals moebius formula") {
    auto moment = [](std::span<const int> B) {
        std::uint64_t h = 14695981039346656037ull;
        for (int e : B) h = (h ^ static_cast<std::uint64_t>(e)) * 1099511628211ull;
        rlab::Rng local(h);
        return Complex{2.0 * local.next_double() - 1.0, 2.0 * local.next_double() - 1.0};
    };
    for (int n = 1; n <= 6; ++n) {
        std::vector<int> B;
        for (int i = 0; i < n; ++i) B.push_back(i + 1);
        const Complex a = rlab::free_cumulant(moment, B);
        const Complex b = rlab::free_cumulant_moebius(moment, B);
        CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("free cumulants: second order closed form") {
    // m_o[{i,j}] = m[{i,j}] - m[{i}] m[{j}]
    auto moment = [](std::span<const int> B) {
        return B.size() == 1 ? Complex{0.3, 0.1} : Complex{-0.2, 0.4};
    };
    const std::vector<int> B{1, 2};
    const Complex want = Complex{-0.2, 0.4} - Complex{0.3, 0.1} * Complex{0.3, 0.1};
    CHECK(std::abs(rlab::free_cumulant(moment, B) - want) < 1e-15);
}

TEST_CASE("semicircle x-moment cumulants vanish beyond order two") {
    // <x^{2n}> = Catalan(n) encodes freeness: cumulant 1 at order 2, 0 beyond
    auto xmoment = [](std::span<const int> B) {
        const auto n = B.size();
        if (n % 2 == 1) return Complex{0.0, 0.0};
        return Complex{static_cast<double>(rlab::catalan(static_cast<int>(n / 2))), 0.0};
    };
    std::vector<int> B{1, 2};
    CHECK(std::abs(rlab::free_cumulant(xmoment, B) - 1.0) < 1e-12);
    for (int n = 3; n <= 6; ++n) {
        B.push_back(n);
        CHECK(std::abs(rlab::free_cumulant(xmoment, B)) < 1e-12);
    }
}

TEST_CASE("kernel validation") {
    CHECK_THROWS_AS(rlab::SpectralKernel::resolvent({0.5, 0.0}).validate(), rlab::ValidationError);
    CHECK_NOTHROW(rlab::SpectralKernel::resolvent({0.5, 1e-8}).validate());
    CHECK_THROWS_AS(rlab::SpectralKernel::absolute({2e6, 1.0}).validate(), rlab::ValidationError);
    CHECK(rlab::SpectralKernel::resolvent({0.5, -0.25}).eta() == 0.25);
}

} // TEST_SUITE

#include "rlab/semicircle.hpp"

#include "rlab/errors.hpp"
#include "rlab/ncpart.hpp"
#include "rlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace rlab {

SpectralKernel SpectralKernel::resolvent(Complex z) {
    SpectralKernel k{Kind::resolvent, z};
    k.validate();
    return k;
}

SpectralKernel SpectralKernel::absolute(Complex z) {
    SpectralKernel k{Kind::absolute, z};
    k.validate();
    return k;
}

void SpectralKernel::validate() const {
    if (z.imag() == 0.0)
        throw ValidationError("spectral kernel requires Im z != 0 (z = " + std::to_string(z.real()) + ")");
    if (std::abs(z) > kMaxAbsZ)
        throw ValidationError("|z| exceeds the " + std::to_string(kMaxAbsZ) + " cap");
}

Complex SpectralKernel::eval(double x) const {
    return kind == Kind::resolvent ? 1.0 / (x - z) : Complex(1.0 / std::abs(x - z), 0.0);
}

Complex stieltjes(Complex z) {
    if (z.imag() == 0.0 && std::abs(z.real()) <= 2.0)
        throw ValidationError("stieltjes undefined on the support [-2,2] (z = " + std::to_string(z.real()) + ")");
    if (std::abs(z) > kMaxAbsZ)
        throw ValidationError("stieltjes |z| exceeds the " + std::to_string(kMaxAbsZ) + " cap");
    // m = -2/(z + s), s = sqrt(z^2-4) with the branch chosen to avoid
    // cancellation: Re(conj(s) z) >= 0 keeps |z + s| maximal.
    Complex s = std::sqrt(z * z - 4.0);
    if ((std::conj(s) * z).real() < 0.0) s = -s;
    return -2.0 / (z + s);
}

double rho(double x) {
    const double d = 4.0 - x * x;
    return d <= 0.0 ? 0.0 : std::sqrt(d) / (2.0 * 3.14159265358979323846264338327950288);
}

std::vector<Complex> stieltjes_derivatives(Complex z, int order) {
    if (order < 0) throw ValidationError("derivative order must be >= 0");
    std::vector<Complex> d(static_cast<std::size_t>(order) + 1);
    d[0] = stieltjes(z);
    if (order == 0) return d;
    // differentiate m^2 + z m + 1 = 0 n times:
    // (2m+z) m^(n) + sum_{j=1}^{n-1} C(n,j) m^(j) m^(n-j) + n m^(n-1) = 0
    std::vector<std::vector<double>> binom(static_cast<std::size_t>(order) + 1);
    for (int n = 0; n <= order; ++n) {
        binom[static_cast<std::size_t>(n)].resize(static_cast<std::size_t>(n) + 1, 1.0);
        for (int j = 1; j < n; ++j)
            binom[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)] =
                binom[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(j) - 1] +
                binom[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(j)];
    }
    const Complex denom = 2.0 * d[0] + z; // equals (m^2-1)/m, nonzero off [-2,2]
    for (int n = 1; n <= order; ++n) {
        Complex acc = static_cast<double>(n) * d[static_cast<std::size_t>(n) - 1];
        for (int j = 1; j < n; ++j)
            acc += binom[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)] *
                   d[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(n) - static_cast<std::size_t>(j)];
        d[static_cast<std::size_t>(n)] = -acc / denom;
    }
    return d;
}

namespace {

Complex dd_quadrature(std::span<const Complex> zs) {
    return sc_integral([&zs](double x) {
        Complex p = 1.0;
        for (const Complex& z : zs) p /= (x - z);
        return p;
    });
}

Complex dd_confluent_table(std::span<const Complex> zs) {
    // sort so equal parameters are adjacent; divided differences are
    // permutation symmetric so any total order works
    std::vector<Complex> pts(zs.begin(), zs.end());
    std::sort(pts.begin(), pts.end(), [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    const std::size_t n = pts.size();
    std::size_t max_mult = 1;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pts[j] == pts[i]) ++j;
        max_mult = std::max(max_mult, j - i);
        i = j;
    }
    std::map<std::pair<double, double>, std::vector<Complex>> ders;
    for (const Complex& p : pts) {
        const auto key = std::make_pair(p.real(), p.imag());
        if (!ders.count(key)) ders[key] = stieltjes_derivatives(p, static_cast<int>(max_mult) - 1);
    }
    double fact = 1.0;
    std::vector<double> factorial(max_mult, 1.0);
    for (std::size_t w = 1; w < max_mult; ++w) {
        fact *= static_cast<double>(w);
        factorial[w] = fact;
    }
    // Newton table over the (possibly repeated) point list
    std::vector<Complex> col(n);
    for (std::size_t i = 0; i < n; ++i)
        col[i] = ders[std::make_pair(pts[i].real(), pts[i].imag())][0];
    std::vector<Complex> prev = col;
    for (std::size_t w = 1; w < n; ++w) {
        std::vector<Complex> cur(n - w);
        for (std::size_t i = 0; i + w < n; ++i) {
            const std::size_t j = i + w;
            if (pts[i] == pts[j]) {
                cur[i] = ders[std::make_pair(pts[i].real(), pts[i].imag())][w] / factorial[w];
            } else {
                cur[i] = (prev[i + 1] - prev[i]) / (pts[j] - pts[i]);
            }
        }
        prev = std::move(cur);
    }
    return prev[0];
}

} // namespace

Complex divided_difference(std::span<const Complex> zs) {
    if (zs.empty()) throw ValidationError("divided_difference requires at least one parameter");
    if (zs.size() > static_cast<std::size_t>(kMaxChain))
        throw ValidationError("divided_difference over " + std::to_string(zs.size()) + " parameters exceeds the chain guard " + std::to_string(kMaxChain));
    double min_eta = 1e300;
    for (const Complex& z : zs) {
        if (z.imag() == 0.0 && std::abs(z.real()) <= 2.0)
            throw ValidationError("divided_difference parameter on the support [-2,2]");
        if (std::abs(z) > kMaxAbsZ)
            throw ValidationError("divided_difference |z| exceeds the " + std::to_string(kMaxAbsZ) + " cap");
        min_eta = std::min(min_eta, std::abs(z.imag()));
    }
    if (zs.size() == 1) return stieltjes(zs[0]);
    // minimum gap over *distinct* pairs decides the route; exact duplicates go
    // through the confluent table regardless
    const double tau = kDdGapFactor * min_eta;
    double min_gap = 1e300;
    for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t j = i + 1; j < zs.size(); ++j) {
            const double g = std::abs(zs[i] - zs[j]);
            if (g > 0.0) min_gap = std::min(min_gap, g);
        }
    if (min_gap >= tau) return dd_confluent_table(zs);
    return dd_quadrature(zs);
}

Complex sc_moment(std::span<const SpectralKernel> kernels) {
    if (kernels.empty()) throw ValidationError("sc_moment requires at least one kernel");
    for (const auto& k : kernels) k.validate();
    const bool all_resolvent = std::all_of(kernels.begin(), kernels.end(), [](const SpectralKernel& k) {
        return k.kind == SpectralKernel::Kind::resolvent;
    });
    if (all_resolvent) {
        std::vector<Complex> zs;
        zs.reserve(kernels.size());
        for (const auto& k : kernels) zs.push_back(k.z);
        return divided_difference(zs);
    }
    return sc_integral([&kernels](double x) {
        Complex p = 1.0;
        for (const auto& k : kernels) p *= k.eval(x);
        return p;
    });
}

Complex sc_function_moment(std::span<const FunctionKernel> fns) {
    if (fns.empty()) throw ValidationError("sc_function_moment requires at least one function");
    for (const auto& fn : fns)
        if (!fn.f) throw ValidationError("sc_function_moment: empty function kernel");
    return sc_integral([&fns](double x) {
        Complex p = 1.0;
        for (const auto& fn : fns) p *= fn.f(x);
        return p;
    });
}

double phi(double s) {
    if (s < 0.0) throw ValidationError("phi requires s >= 0, got " + std::to_string(s));
    if (s == 0.0) return 1.0;
    return sc_integral([s](double x) {
        return Complex(std::cos(s * x), std::sin(s * x));
    }).real();
}

namespace {

Complex cumulant_masked(const MomentFn& moment, std::span<const int> ground,
                        std::uint32_t mask, std::unordered_map<std::uint32_t, Complex>& memo) {
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    std::vector<int> elems;
    for (std::size_t i = 0; i < ground.size(); ++i)
        if (mask & (1u << i)) elems.push_back(ground[i]);
    const int n = static_cast<int>(elems.size());
    Complex val = moment(elems);
    if (n > 1) {
        for (const Partition& pi : enumerate_ncp(n)) {
            if (pi.blocks.size() < 2) continue;
            Complex prod = 1.0;
            for (const auto& blk : pi.blocks) {
                std::uint32_t sub = 0;
                for (int pos : blk) {
                    // blk holds 1-based positions within elems; map back to ground bits
                    int count = 0;
                    for (std::size_t g = 0; g < ground.size(); ++g) {
                        if (mask & (1u << g)) {
                            ++count;
                            if (count == pos) {
                                sub |= (1u << g);
                                break;
                            }
                        }
                    }
                }
                prod *= cumulant_masked(moment, ground, sub, memo);
            }
            val -= prod;
        }
    }
    memo.emplace(mask, val);
    return val;
}

void check_cumulant_ground(std::span<const int> B) {
    if (B.empty()) throw ValidationError("free cumulant of the empty set");
    if (B.size() > static_cast<std::size_t>(kMaxChain))
        throw ValidationError("free cumulant ground set of size " + std::to_string(B.size()) + " exceeds guard " + std::to_string(kMaxChain));
}

} // namespace

Complex free_cumulant(const MomentFn& moment, std::span<const int> B) {
    check_cumulant_ground(B);
    std::unordered_map<std::uint32_t, Complex> memo;
    const std::uint32_t full = (1u << B.size()) - 1u;
    return cumulant_masked(moment, B, full, memo);
}

Complex free_cumulant_moebius(const MomentFn& moment, std::span<const int> B) {
    check_cumulant_ground(B);
    const int n = static_cast<int>(B.size());
    Complex total = 0.0;
    for (const Partition& pi : enumerate_ncp(n)) {
        const Partition kp = kreweras(pi);
        double coef = (pi.blocks.size() % 2 == 1) ? 1.0 : -1.0;
        for (const auto& S : kp.blocks)
            coef *= static_cast<double>(catalan(static_cast<int>(S.size()) - 1));
        Complex prod = 1.0;
        for (const auto& T : pi.blocks) {
            std::vector<int> elems;
            elems.reserve(T.size());
            for (int pos : T) elems.push_back(B[static_cast<std::size_t>(pos) - 1]);
            prod *= moment(elems);
        }
        total += coef * prod;
    }
    return total;
}

} // namespace rlab

#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace rlab {

/// Gauss-Legendre nodes and weights on [-1,1]. Immutable once built.
struct GlRule {
    int n = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule for the given node count (thread-safe, rules never mutate).
const GlRule& gl_rule(int n);

inline constexpr double kQuadRelTol = 1e-10;
inline constexpr int kQuadMinNodes = 16;
inline constexpr int kQuadMaxNodes = 1 << 17;

/// Adaptive integral of f over [a,b]: Gauss-Legendre with node doubling until
/// two successive levels agree to rel_tol (relative, with an absolute floor).
/// Throws NumericError if kQuadMaxNodes is reached without convergence.
std::complex<double> integrate(const std::function<std::complex<double>(double)>& f,
                               double a, double b, double rel_tol = kQuadRelTol);

/// Integral of f against the semicircle density rho_sc over [-2,2], via the
/// substitution x = 2cos(theta) which absorbs the endpoint square roots:
/// (2/pi) * int_0^pi sin^2(theta) f(2cos theta) dtheta.
std::complex<double> sc_integral(const std::function<std::complex<double>(double)>& f,
                                 double rel_tol = kQuadRelTol);

} // namespace rlab

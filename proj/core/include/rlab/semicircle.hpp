#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace rlab {

using Complex = std::complex<double>;

inline constexpr int kMaxChain = 10;       // K_max for chains and cumulant ground sets
inline constexpr double kMaxAbsZ = 1e6;    // spectral parameters beyond this are numerically inert
inline constexpr double kDdGapFactor = 1e-3; // tau_dd = kDdGapFactor * min|Im z_i|

/// Resolvent kernel 1/(x-z) or absolute-value kernel 1/|x-z|.
struct SpectralKernel {
    enum class Kind { resolvent, absolute };

    Kind kind = Kind::resolvent;
    Complex z;

    static SpectralKernel resolvent(Complex z);
    static SpectralKernel absolute(Complex z);

    /// Throws ValidationError if Im z == 0 or |z| exceeds kMaxAbsZ.
    void validate() const;

    Complex eval(double x) const;
    double eta() const { return std::abs(z.imag()); }
};

/// Complex-valued function of the spectrum with a declared smoothness order.
/// (Real observables embed; e^{isx} needs the complex codomain.)
struct FunctionKernel {
    std::function<Complex(double)> f;
    int smoothness_order = 0;
};

/// Stieltjes transform of the semicircle law: the root of m^2 + z m + 1 = 0
/// with Im m * Im z > 0, and |m| < 1 off [-2,2]. Allows real z with |z| > 2.
Complex stieltjes(Complex z);

/// Semicircle density sqrt(4-x^2)/(2 pi) on [-2,2], 0 outside.
double rho(double x);

/// Derivatives m, m', ..., m^(order) at z, from differentiating the defining
/// quadratic (m' = m^2/(1-m^2) and the recursion it seeds). Exact, no limits.
std::vector<Complex> stieltjes_derivatives(Complex z, int order);

/// Iterated divided difference m_sc[z_1,...,z_n]. Routes:
/// (a) confluent Newton table with analytic derivatives when the minimum gap
///     between distinct points is >= tau_dd = 1e-3 * min|Im z_i|,
/// (b) quadrature of int rho(x) prod 1/(x-z_i) dx otherwise.
Complex divided_difference(std::span<const Complex> zs);

/// <g_1 ... g_n>_sc = int rho(x) prod g_i(x) dx. Exactly equals
/// divided_difference when every kernel is a resolvent.
Complex sc_moment(std::span<const SpectralKernel> kernels);

/// int rho(x) prod f_i(x) dx by quadrature.
Complex sc_function_moment(std::span<const FunctionKernel> fns);

/// phi(s) = int e^{isx} rho(x) dx (= J_1(2s)/s); real by symmetry; phi(0)=1.
double phi(double s);

/// Moment function over sorted index subsets of some ground set.
using MomentFn = std::function<Complex(std::span<const int>)>;

/// Free cumulant m_o[B] defined implicitly by
/// m[B] = sum over non-crossing partitions pi of B of prod m_o[block].
/// Computed by the subtraction recursion.
Complex free_cumulant(const MomentFn& moment, std::span<const int> B);

/// Same value by the explicit Moebius/Catalan formula
/// sum_pi (-1)^(|pi|-1) (prod_{S in K(pi)} C_{|S|-1}) prod_{T in pi} m[T].
Complex free_cumulant_moebius(const MomentFn& moment, std::span<const int> B);

} // namespace rlab

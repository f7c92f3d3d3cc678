#pragma once

#include "rlab/mchain.hpp"
#include "rlab/semicircle.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rlab {

using CVector = Eigen::VectorXcd;

enum class Dist { gaussian, rademacher, uniform };
enum class Recipe {
    random_hermitian_traceless,
    signed_projection_traceless,
    random_hermitian,
    identity,
    random_unit_vectors,
};

Dist dist_from_string(const std::string& s);
std::string to_string(Dist d);
Recipe recipe_from_string(const std::string& s);
std::string to_string(Recipe r);

/// One Wigner realization. beta=1 samples are stored real (GOE-type), beta=2
/// complex (GUE-type). Off-diagonal variance 1/N, diagonal 2/(N beta); for
/// beta=2 real and imaginary parts are independent so E w_ij^2 = 0.
/// Identical (N, beta, dist, seed) reproduce bit-identical entries.
struct WignerSample {
    int N = 0;
    int beta = 1;
    Dist dist = Dist::gaussian;
    std::uint64_t seed = 0;

    Eigen::MatrixXd Wr; // beta = 1
    CMatrix Wc;         // beta = 2

    Eigen::VectorXd lambda; // ascending
    Eigen::MatrixXd Ur;     // beta = 1 eigenvectors
    CMatrix Uc;             // beta = 2 eigenvectors
    bool has_values = false;
    bool has_vectors = false;

    bool is_real() const { return beta == 1; }
    /// Complex view of W (materializes a cast for beta = 1).
    CMatrix W() const;
    /// Eigendecomposition, eigenvalues-only when vectors are not needed.
    /// Amortized: computed once, reused by every evaluator on this sample.
    void ensure_eigen(bool need_vectors = true);
};

WignerSample sample_wigner(int N, int beta, Dist dist, std::uint64_t seed);

/// Deterministic observables: a primary matrix (per recipe) plus unit vectors
/// x, y, all derived from the seed. Traceless recipes subtract <B> I before
/// normalizing; matrices are normalized to unit spectral norm.
struct ObservableSet {
    int N = 0;
    Recipe recipe = Recipe::random_hermitian;
    std::uint64_t seed = 0;
    bool has_matrix = false;
    CMatrix primary;
    CVector x, y;
};

/// real_field draws the primary matrix real symmetric (beta = 1 experiments
/// keep every eigenbasis rotation in real arithmetic); x, y stay complex.
ObservableSet make_observables(int N, Recipe recipe, std::uint64_t seed, bool real_field = false);

/// Rotates B into the eigenbasis of the sample: U^* B U.
CMatrix rotate_to_eigenbasis(const WignerSample& s, const CMatrix& B);
/// Diagonal of U^* B U only (one multiply instead of two).
CVector eigenbasis_diag(const WignerSample& s, const CMatrix& B);
/// U^* v.
CVector rotate_vector(const WignerSample& s, const CVector& v);

/// (1/N) sum_i 1/(lambda_i - z); eigenvalues-only fast path for <G(z)>.
Complex resolvent_trace(WignerSample& s, Complex z);

/// Evaluates chains on one sample with the matrix rotations done once.
/// Kernel factors act diagonally, so a scan over spectral parameters, kernel
/// kinds, functions, or evolution times costs O(N^2) per point (k <= 2)
/// after the O(N^3) setup.
class ChainEvaluator {
public:
    ChainEvaluator(WignerSample& s, std::span<const CMatrix> mats);

    int n_matrices() const { return static_cast<int>(rot_.size()); }

    /// <G_1 B_1 ... G_k B_k> with k = n_matrices() kernels.
    Complex avg(std::span<const SpectralKernel> kernels) const;
    /// <x, G_1 B_1 ... B_k G_{k+1} y> with n_matrices()+1 kernels.
    Complex iso(std::span<const SpectralKernel> kernels, const CVector& x, const CVector& y) const;
    /// Same chains with general functions f_i(W).
    Complex fw_avg(std::span<const FunctionKernel> fns) const;
    Complex fw_iso(std::span<const FunctionKernel> fns, const CVector& x, const CVector& y) const;
    /// <e^{isW} B_1 e^{-isW} B_2>; requires exactly two matrices. O(N^2) per s.
    Complex heisenberg(double s) const;

private:
    Eigen::VectorXcd kernel_diag(const SpectralKernel& k) const;
    const CMatrix& pair_table() const;

    const WignerSample* s_;
    std::vector<CMatrix> rot_;
    mutable CMatrix pair_;
    mutable bool pair_ready_ = false;
};

/// <G(z_1) B_1 ... G(z_k) B_k> for an averaged-form chain (eigenbasis route).
Complex chain_avg(WignerSample& s, const ChainSpec& chain);
/// <x, G(z_1) B_1 ... B_k G(z_{k+1}) y> for a matrix-form chain.
Complex chain_iso(WignerSample& s, const ChainSpec& chain, const CVector& x, const CVector& y);
/// Direct linear-solve route (no eigendecomposition); cross-check for small N.
Complex chain_avg_direct(const WignerSample& s, const ChainSpec& chain);
Complex chain_iso_direct(const WignerSample& s, const ChainSpec& chain, const CVector& x, const CVector& y);

/// Normalized deviation N eta^{k/2} |<chain> - <M B_k>| for an averaged chain
/// of traceless matrices; a matrix-form single-kernel chain measures
/// N eta |<G - m>| (the k = 0 case).
double psi_av(WignerSample& s, const ChainSpec& chain);
/// sqrt(N eta^{k+1}) |(chain - M)_{xy}| for a matrix-form chain, k matrices.
double psi_iso(WignerSample& s, const ChainSpec& chain, const CVector& x, const CVector& y);

/// <e^{isW} A_1 e^{-isW} A_2> by spectral calculus.
Complex heisenberg_pair(WignerSample& s, double t, const CMatrix& A1, const CMatrix& A2);

/// <f_1(W) B_1 ... f_k(W) B_k> and the isotropic analogue.
Complex fw_chain_avg(WignerSample& s, std::span<const FunctionKernel> fns,
                     std::span<const CMatrix> mats);
Complex fw_chain_iso(WignerSample& s, std::span<const FunctionKernel> fns,
                     std::span<const CMatrix> mats, const CVector& x, const CVector& y);

} // namespace rlab

#pragma once

#include "rlab/ncpart.hpp"
#include "rlab/semicircle.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rlab {

using CMatrix = Eigen::MatrixXcd;

inline constexpr double kTracelessTol = 1e-12;  // on |tr B|/N
inline constexpr double kQWeightGuard = 1e-8;   // on |1 - m_i m_j|

/// Alternating kernels/matrices chain. Matrix form has one fewer matrix than
/// kernels (G_1 B_1 ... B_{k-1} G_k); averaged form has equally many
/// (G_1 B_1 ... G_k B_k under the normalized trace).
struct ChainSpec {
    enum class Form { matrix, averaged };

    std::vector<SpectralKernel> kernels;
    std::vector<CMatrix> matrices;
    std::vector<bool> traceless;      // detected: |<B_i>| < kTracelessTol
    std::vector<double> spectral_norms; // power-iteration estimates, recorded
    int N = 0;

    /// Validates counts and dimensions, detects tracelessness, records norms.
    /// dim_hint is required only when matrices is empty (k = 1 chains).
    static ChainSpec make(std::vector<SpectralKernel> kernels,
                          std::vector<CMatrix> matrices, int dim_hint = 0);

    Form form() const {
        return matrices.size() == kernels.size() ? Form::averaged : Form::matrix;
    }
    int n_kernels() const { return static_cast<int>(kernels.size()); }
    int traceless_count() const;
    double min_eta() const;
    /// min over kernels of dist(z, [-2,2])
    double min_dist() const;
    double max_norm() const;
};

/// One partition's contribution to M.
struct ChainTerm {
    Partition pi;
    Complex coeff;   // product of free cumulants (times q-weights for the graph route)
    CMatrix matrix;  // partial trace pTr_{K(pi)}
};

struct ChainValue {
    CMatrix matrix_part;
    std::vector<ChainTerm> decomposition;
};

/// pTr_pi(B_1,...,B_{k-1}): product of normalized traces of in-block products
/// over blocks not containing k, times the increasing-index matrix product
/// over the block containing k (identity if that block is {k}).
CMatrix ptr(const Partition& pi, std::span<const CMatrix> mats, int N);

/// M(z_1,B_1,...,B_{k-1},z_k) = sum over pi in NCP[k] of
/// pTr_{K(pi)} * prod of free cumulants of sc moments over pi's blocks.
ChainValue m_matrix(const ChainSpec& chain);

/// <M(z_1,B_1,...,z_k) B_k> for an averaged-form chain.
Complex m_avg(const ChainSpec& chain);

/// Non-crossing-graph route (resolvent kernels only):
/// m_1...m_k sum over E in NCG[1,k] of pTr_{K(pi(E))} prod_{(ij) in E} q_ij
/// with q_ij = m_i m_j / (1 - m_i m_j).
ChainValue m_matrix_q(const ChainSpec& chain);

enum class RecVariant { rec1 = 1, rec2 = 2 };

/// Relative Frobenius residual of the recursion identity at position j.
double recursion_residual(const ChainSpec& chain, int j, RecVariant variant);

/// Theoretical size ceiling for M: with nm matrices of which a are traceless,
/// eta = min|Im z|, d = min dist(z, [-2,2]):
///   matrix form:   eta^-(nm - ceil(a/2))     (d <= 1),  d^-(nm+1)  (d >= 1)
///   averaged form: eta^-(nm - 1 - ceil(a/2)) (d <= 1),  d^-nm      (d >= 1)
double m_bound(const ChainSpec& chain);

/// Deterministic term for general functions of W (matrix form):
/// sum over pi of pTr_{K(pi)} prod sc_o[block], cumulants of sc_function_moment.
ChainValue sc_chain_matrix(std::span<const FunctionKernel> fns,
                           std::span<const CMatrix> mats, int dim_hint = 0);

/// Averaged form: every Kreweras block traced, <...>_{K(pi)} = product of
/// normalized traces of in-block increasing-index products.
Complex sc_chain_avg(std::span<const FunctionKernel> fns, std::span<const CMatrix> mats);

/// Power-iteration estimate of the spectral norm (largest singular value).
double spectral_norm_estimate(const CMatrix& B);

} // namespace rlab

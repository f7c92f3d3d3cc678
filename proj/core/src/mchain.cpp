#include "rlab/mchain.hpp"

#include "rlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <unordered_map>

namespace rlab {

double spectral_norm_estimate(const CMatrix& B) {
    const Eigen::Index n = B.rows();
    if (n == 0) return 0.0;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(1.0 + 0.5 * std::cos(static_cast<double>(i)), 0.25 * std::sin(static_cast<double>(i) + 1.0));
    v.normalize();
    double sigma = 0.0;
    for (int iter = 0; iter < 60; ++iter) {
        Eigen::VectorXcd w = B.adjoint() * (B * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        w /= nw;
        const double next = std::sqrt(nw);
        if (iter > 4 && std::abs(next - sigma) <= 1e-9 * std::max(next, 1e-30)) return next;
        sigma = next;
        v.swap(w);
    }
    return sigma;
}

ChainSpec ChainSpec::make(std::vector<SpectralKernel> kernels,
                          std::vector<CMatrix> matrices, int dim_hint) {
    if (kernels.empty()) throw ValidationError("chain requires at least one kernel");
    if (kernels.size() > static_cast<std::size_t>(kMaxChain))
        throw ValidationError("chain length " + std::to_string(kernels.size()) + " exceeds guard " + std::to_string(kMaxChain));
    for (const auto& k : kernels) k.validate();
    const std::size_t nk = kernels.size();
    const std::size_t nm = matrices.size();
    if (nm != nk && nm + 1 != nk)
        throw ValidationError("chain with " + std::to_string(nk) + " kernels needs " + std::to_string(nk - 1) +
                              " (matrix form) or " + std::to_string(nk) + " (averaged form) matrices, got " + std::to_string(nm));
    ChainSpec c;
    c.kernels = std::move(kernels);
    c.matrices = std::move(matrices);
    if (c.matrices.empty()) {
        if (dim_hint < 1) throw ValidationError("chain without matrices needs a positive dimension hint");
        c.N = dim_hint;
    } else {
        c.N = static_cast<int>(c.matrices.front().rows());
        for (const auto& B : c.matrices)
            if (B.rows() != c.N || B.cols() != c.N)
                throw ValidationError("chain matrices must all be square of equal dimension");
        if (dim_hint > 0 && dim_hint != c.N)
            throw ValidationError("dimension hint " + std::to_string(dim_hint) + " conflicts with matrix dimension " + std::to_string(c.N));
    }
    c.traceless.reserve(c.matrices.size());
    c.spectral_norms.reserve(c.matrices.size());
    for (const auto& B : c.matrices) {
        c.traceless.push_back(std::abs(B.trace()) / static_cast<double>(c.N) < kTracelessTol);
        c.spectral_norms.push_back(spectral_norm_estimate(B));
    }
    return c;
}

int ChainSpec::traceless_count() const {
    return static_cast<int>(std::count(traceless.begin(), traceless.end(), true));
}

double ChainSpec::min_eta() const {
    double e = 1e300;
    for (const auto& k : kernels) e = std::min(e, k.eta());
    return e;
}

double ChainSpec::min_dist() const {
    double d = 1e300;
    for (const auto& k : kernels) {
        const double dx = std::max(0.0, std::abs(k.z.real()) - 2.0);
        d = std::min(d, std::hypot(dx, k.z.imag()));
    }
    return d;
}

double ChainSpec::max_norm() const {
    double m = 0.0;
    for (double s : spectral_norms) m = std::max(m, s);
    return m;
}

CMatrix ptr(const Partition& pi, std::span<const CMatrix> mats, int N) {
    const int k = pi.k;
    if (mats.size() + 1 != static_cast<std::size_t>(k))
        throw ValidationError("ptr over [" + std::to_string(k) + "] needs " + std::to_string(k - 1) + " matrices, got " + std::to_string(mats.size()));
    Complex scal = 1.0;
    CMatrix prod = CMatrix::Identity(N, N);
    bool have_matrix_block = false;
    for (const auto& block : pi.blocks) {
        const bool contains_k = (block.back() == k);
        if (contains_k) {
            have_matrix_block = true;
            for (int j : block)
                if (j != k) prod = prod * mats[static_cast<std::size_t>(j) - 1];
        } else {
            if (block.size() == 1) {
                scal *= mats[static_cast<std::size_t>(block.front()) - 1].trace() / static_cast<double>(N);
            } else {
                CMatrix p = mats[static_cast<std::size_t>(block.front()) - 1];
                for (std::size_t i = 1; i < block.size(); ++i)
                    p = p * mats[static_cast<std::size_t>(block[i]) - 1];
                scal *= p.trace() / static_cast<double>(N);
            }
        }
    }
    if (!have_matrix_block) throw ValidationError("ptr: partition does not cover element k");
    return scal * prod;
}

namespace {

/// Free cumulants over subset bitmasks of [k], moment supplied per mask.
class CumulantTable {
public:
    CumulantTable(int k, std::function<Complex(std::uint32_t)> moment)
        : k_(k), moment_(std::move(moment)) {}

    Complex cum(std::uint32_t mask) {
        auto it = memo_.find(mask);
        if (it != memo_.end()) return it->second;
        std::vector<int> bits;
        for (int i = 0; i < k_; ++i)
            if (mask & (1u << i)) bits.push_back(i);
        const int n = static_cast<int>(bits.size());
        Complex val = moment_(mask);
        if (n > 1) {
            for (const Partition& pi : enumerate_ncp(n)) {
                if (pi.blocks.size() < 2) continue;
                Complex prod = 1.0;
                for (const auto& blk : pi.blocks) {
                    std::uint32_t sub = 0;
                    for (int pos : blk) sub |= (1u << bits[static_cast<std::size_t>(pos) - 1]);
                    prod *= cum(sub);
                }
                val -= prod;
            }
        }
        memo_.emplace(mask, val);
        return val;
    }

private:
    int k_;
    std::function<Complex(std::uint32_t)> moment_;
    std::unordered_map<std::uint32_t, Complex> memo_;
};

std::uint32_t block_mask(const std::vector<int>& block) {
    std::uint32_t m = 0;
    for (int e : block) m |= (1u << (e - 1));
    return m;
}

ChainValue assemble(int k, CumulantTable& cumulants, std::span<const CMatrix> mats, int N) {
    ChainValue out;
    out.matrix_part = CMatrix::Zero(N, N);
    for (const Partition& pi : enumerate_ncp(k)) {
        Complex coeff = 1.0;
        for (const auto& block : pi.blocks) coeff *= cumulants.cum(block_mask(block));
        CMatrix term = ptr(kreweras(pi), mats, N);
        out.matrix_part += coeff * term;
        out.decomposition.push_back(ChainTerm{pi, coeff, std::move(term)});
    }
    return out;
}

CumulantTable kernel_cumulants(const std::vector<SpectralKernel>& kernels) {
    auto moments = std::make_shared<std::unordered_map<std::uint32_t, Complex>>();
    auto kerns = std::make_shared<std::vector<SpectralKernel>>(kernels);
    return CumulantTable(static_cast<int>(kernels.size()), [moments, kerns](std::uint32_t mask) {
        auto it = moments->find(mask);
        if (it != moments->end()) return it->second;
        std::vector<SpectralKernel> sub;
        for (std::size_t i = 0; i < kerns->size(); ++i)
            if (mask & (1u << i)) sub.push_back((*kerns)[i]);
        const Complex v = sc_moment(sub);
        moments->emplace(mask, v);
        return v;
    });
}

CumulantTable function_cumulants(std::span<const FunctionKernel> fns) {
    auto moments = std::make_shared<std::unordered_map<std::uint32_t, Complex>>();
    auto fcopy = std::make_shared<std::vector<FunctionKernel>>(fns.begin(), fns.end());
    return CumulantTable(static_cast<int>(fns.size()), [moments, fcopy](std::uint32_t mask) {
        auto it = moments->find(mask);
        if (it != moments->end()) return it->second;
        std::vector<FunctionKernel> sub;
        for (std::size_t i = 0; i < fcopy->size(); ++i)
            if (mask & (1u << i)) sub.push_back((*fcopy)[i]);
        const Complex v = sc_function_moment(sub);
        moments->emplace(mask, v);
        return v;
    });
}

} // namespace

ChainValue m_matrix(const ChainSpec& chain) {
    const int k = chain.n_kernels();
    std::span<const CMatrix> mats(chain.matrices);
    if (chain.form() == ChainSpec::Form::averaged) mats = mats.first(mats.size() - 1);
    CumulantTable cumulants = kernel_cumulants(chain.kernels);
    return assemble(k, cumulants, mats, chain.N);
}

Complex m_avg(const ChainSpec& chain) {
    if (chain.form() != ChainSpec::Form::averaged)
        throw ValidationError("m_avg needs an averaged-form chain (k kernels, k matrices)");
    const ChainValue v = m_matrix(chain);
    return (v.matrix_part * chain.matrices.back()).trace() / static_cast<double>(chain.N);
}

ChainValue m_matrix_q(const ChainSpec& chain) {
    const int k = chain.n_kernels();
    for (const auto& kk : chain.kernels)
        if (kk.kind != SpectralKernel::Kind::resolvent)
            throw ValidationError("m_matrix_q is defined for resolvent kernels only");
    std::span<const CMatrix> mats(chain.matrices);
    if (chain.form() == ChainSpec::Form::averaged) mats = mats.first(mats.size() - 1);
    std::vector<Complex> m(static_cast<std::size_t>(k));
    Complex pref = 1.0;
    for (int i = 0; i < k; ++i) {
        m[static_cast<std::size_t>(i)] = stieltjes(chain.kernels[static_cast<std::size_t>(i)].z);
        pref *= m[static_cast<std::size_t>(i)];
    }
    ChainValue out;
    out.matrix_part = CMatrix::Zero(chain.N, chain.N);
    for (const NonCrossingGraph& g : enumerate_ncg(k)) {
        Complex q = 1.0;
        for (const auto& [i, j] : g.edges) {
            const Complex denom = 1.0 - m[static_cast<std::size_t>(i) - 1] * m[static_cast<std::size_t>(j) - 1];
            if (std::abs(denom) <= kQWeightGuard)
                throw NumericError("near-singular q weight: |1 - m_" + std::to_string(i) + " m_" + std::to_string(j) + "| <= 1e-8");
            q *= m[static_cast<std::size_t>(i) - 1] * m[static_cast<std::size_t>(j) - 1] / denom;
        }
        const Partition pi = connected_components(g);
        CMatrix term = ptr(kreweras(pi), mats, chain.N);
        out.matrix_part += (pref * q) * term;
        out.decomposition.push_back(ChainTerm{pi, pref * q, std::move(term)});
    }
    return out;
}

namespace {

/// m_matrix on a sub-chain assembled from kernels and matrices.
CMatrix sub_m(std::vector<SpectralKernel> ks, std::vector<CMatrix> ms, int N) {
    return m_matrix(ChainSpec::make(std::move(ks), std::move(ms), N)).matrix_part;
}

Complex tr_n(const CMatrix& A, int N) { return A.trace() / static_cast<double>(N); }

} // namespace

double recursion_residual(const ChainSpec& chain, int j, RecVariant variant) {
    if (chain.form() != ChainSpec::Form::matrix)
        throw ValidationError("recursion_residual expects a matrix-form chain");
    const int k = chain.n_kernels();
    if (j < 1 || j > k) throw ValidationError("recursion position j=" + std::to_string(j) + " outside 1.." + std::to_string(k));
    for (const auto& kk : chain.kernels)
        if (kk.kind != SpectralKernel::Kind::resolvent)
            throw ValidationError("recursion identities hold for resolvent kernels only");

    const int N = chain.N;
    const auto& ks = chain.kernels;
    const auto& A = chain.matrices; // A[i] is A_{i+1} in 1-based chain notation
    const CMatrix I = CMatrix::Identity(N, N);
    const Complex mj = stieltjes(ks[static_cast<std::size_t>(j) - 1].z);

    auto kern_slice = [&](int lo, int hi) { // 1-based inclusive
        return std::vector<SpectralKernel>(ks.begin() + lo - 1, ks.begin() + hi);
    };
    auto mat_slice = [&](int lo, int hi) { // A_lo..A_hi, 1-based inclusive; empty when hi<lo
        if (hi < lo) return std::vector<CMatrix>{};
        return std::vector<CMatrix>(A.begin() + lo - 1, A.begin() + hi);
    };
    auto concat_k = [](std::vector<SpectralKernel> a, const std::vector<SpectralKernel>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    auto concat_m = [](std::vector<CMatrix> a, const std::vector<CMatrix>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };

    const CMatrix lhs = m_matrix(chain).matrix_part;

    // T0: drop G_j and merge its neighbours A_{j-1} A_j
    CMatrix acc(N, N);
    if (k == 1) {
        acc = I;
    } else if (j == 1) {
        acc = A[0] * sub_m(kern_slice(2, k), mat_slice(2, k - 1), N);
    } else if (j == k) {
        acc = sub_m(kern_slice(1, k - 1), mat_slice(1, k - 2), N) * A[static_cast<std::size_t>(k) - 2];
    } else {
        std::vector<CMatrix> merged = mat_slice(1, j - 2);
        merged.push_back(A[static_cast<std::size_t>(j) - 2] * A[static_cast<std::size_t>(j) - 1]);
        merged = concat_m(std::move(merged), mat_slice(j + 1, k - 1));
        acc = sub_m(concat_k(kern_slice(1, j - 1), kern_slice(j + 1, k)), std::move(merged), N);
    }

    if (variant == RecVariant::rec1) {
        for (int l = 1; l < j; ++l) {
            const Complex scal = tr_n(sub_m(kern_slice(l, j - 1), mat_slice(l, j - 2), N) * A[static_cast<std::size_t>(j) - 2], N);
            std::vector<CMatrix> outer_m = mat_slice(1, l - 1);
            outer_m.push_back(I);
            outer_m = concat_m(std::move(outer_m), mat_slice(j, k - 1));
            acc += scal * sub_m(concat_k(kern_slice(1, l), kern_slice(j, k)), std::move(outer_m), N);
        }
        for (int l = j + 1; l <= k; ++l) {
            const Complex scal = tr_n(sub_m(kern_slice(j, l), mat_slice(j, l - 1), N), N);
            std::vector<CMatrix> outer_m = mat_slice(1, j - 1);
            outer_m = concat_m(std::move(outer_m), mat_slice(l, k - 1));
            acc += scal * sub_m(concat_k(kern_slice(1, j - 1), kern_slice(l, k)), std::move(outer_m), N);
        }
    } else {
        for (int l = 1; l < j; ++l) {
            const Complex scal = tr_n(sub_m(kern_slice(l, j), mat_slice(l, j - 1), N), N);
            CMatrix outer(N, N);
            if (j < k) {
                std::vector<CMatrix> outer_m = mat_slice(1, l - 1);
                outer_m.push_back(A[static_cast<std::size_t>(j) - 1]);
                outer_m = concat_m(std::move(outer_m), mat_slice(j + 1, k - 1));
                outer = sub_m(concat_k(kern_slice(1, l), kern_slice(j + 1, k)), std::move(outer_m), N);
            } else {
                outer = sub_m(kern_slice(1, l), mat_slice(1, l - 1), N);
            }
            acc += scal * outer;
        }
        for (int l = j + 1; l <= k; ++l) {
            const Complex scal = tr_n(sub_m(kern_slice(j + 1, l), mat_slice(j + 1, l - 1), N) * A[static_cast<std::size_t>(j) - 1], N);
            std::vector<CMatrix> outer_m = mat_slice(1, j - 1);
            outer_m.push_back(I);
            outer_m = concat_m(std::move(outer_m), mat_slice(l, k - 1));
            acc += scal * sub_m(concat_k(kern_slice(1, j), kern_slice(l, k)), std::move(outer_m), N);
        }
    }

    const CMatrix rhs = mj * acc;
    const double denom = std::max(lhs.norm(), 1e-300);
    return (lhs - rhs).norm() / denom;
}

double m_bound(const ChainSpec& chain) {
    const int nm = static_cast<int>(chain.matrices.size());
    const int a = chain.traceless_count();
    const double eta = chain.min_eta();
    const double d = chain.min_dist();
    const int half_a_up = (a + 1) / 2;
    int eta_exp = 0, d_exp = 0;
    if (chain.form() == ChainSpec::Form::averaged) {
        eta_exp = nm - 1 - half_a_up;
        d_exp = nm;
    } else {
        eta_exp = nm - half_a_up;
        d_exp = nm + 1;
    }
    if (d <= 1.0) return std::pow(eta, -static_cast<double>(eta_exp));
    return std::pow(d, -static_cast<double>(d_exp));
}

ChainValue sc_chain_matrix(std::span<const FunctionKernel> fns,
                           std::span<const CMatrix> mats, int dim_hint) {
    const int k = static_cast<int>(fns.size());
    if (k < 1 || k > kMaxChain) throw ValidationError("sc_chain_matrix needs 1.." + std::to_string(kMaxChain) + " functions");
    if (mats.size() + 1 != static_cast<std::size_t>(k))
        throw ValidationError("sc_chain_matrix with " + std::to_string(k) + " functions needs " + std::to_string(k - 1) + " matrices");
    const int N = mats.empty() ? dim_hint : static_cast<int>(mats.front().rows());
    if (N < 1) throw ValidationError("sc_chain_matrix without matrices needs a positive dimension hint");
    CumulantTable cumulants = function_cumulants(fns);
    return assemble(k, cumulants, mats, N);
}

Complex sc_chain_avg(std::span<const FunctionKernel> fns, std::span<const CMatrix> mats) {
    const int k = static_cast<int>(fns.size());
    if (k < 1 || k > kMaxChain) throw ValidationError("sc_chain_avg needs 1.." + std::to_string(kMaxChain) + " functions");
    if (mats.size() != static_cast<std::size_t>(k))
        throw ValidationError("sc_chain_avg with " + std::to_string(k) + " functions needs " + std::to_string(k) + " matrices");
    const int N = static_cast<int>(mats.front().rows());
    const ChainValue v = sc_chain_matrix(fns, mats.first(mats.size() - 1), N);
    return (v.matrix_part * mats.back()).trace() / static_cast<double>(N);
}

} // namespace rlab

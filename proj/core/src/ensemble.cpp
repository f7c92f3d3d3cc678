#include "rlab/ensemble.hpp"

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

#include <cmath>

namespace rlab {

Dist dist_from_string(const std::string& s) {
    if (s == "gaussian") return Dist::gaussian;
    if (s == "rademacher") return Dist::rademacher;
    if (s == "uniform") return Dist::uniform;
    throw ValidationError("unsupported entry distribution '" + s + "' (gaussian|rademacher|uniform)");
}

std::string to_string(Dist d) {
    switch (d) {
        case Dist::gaussian: return "gaussian";
        case Dist::rademacher: return "rademacher";
        case Dist::uniform: return "uniform";
    }
    return "?";
}

Recipe recipe_from_string(const std::string& s) {
    if (s == "random-hermitian-traceless") return Recipe::random_hermitian_traceless;
    if (s == "signed-projection-traceless") return Recipe::signed_projection_traceless;
    if (s == "random-hermitian") return Recipe::random_hermitian;
    if (s == "identity") return Recipe::identity;
    if (s == "random-unit-vectors") return Recipe::random_unit_vectors;
    throw ValidationError("unknown observable recipe '" + s + "'");
}

std::string to_string(Recipe r) {
    switch (r) {
        case Recipe::random_hermitian_traceless: return "random-hermitian-traceless";
        case Recipe::signed_projection_traceless: return "signed-projection-traceless";
        case Recipe::random_hermitian: return "random-hermitian";
        case Recipe::identity: return "identity";
        case Recipe::random_unit_vectors: return "random-unit-vectors";
    }
    return "?";
}

namespace {

double draw_unit_var(Rng& rng, Dist dist) {
    switch (dist) {
        case Dist::gaussian: return rng.next_normal();
        case Dist::rademacher: return rng.next_sign();
        case Dist::uniform: return rng.next_uniform_unit_var();
    }
    return 0.0;
}

} // namespace

WignerSample sample_wigner(int N, int beta, Dist dist, std::uint64_t seed) {
    if (N < 2) throw ValidationError("Wigner dimension N must be >= 2, got " + std::to_string(N));
    if (beta != 1 && beta != 2) throw ValidationError("beta must be 1 or 2, got " + std::to_string(beta));
    WignerSample s;
    s.N = N;
    s.beta = beta;
    s.dist = dist;
    s.seed = seed;
    Rng rng(seed);
    const double off_scale = 1.0 / std::sqrt(static_cast<double>(N));
    const double diag_scale = std::sqrt(2.0 / (static_cast<double>(N) * beta));
    if (beta == 1) {
        s.Wr.resize(N, N);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j <= i; ++j) {
                const double v = draw_unit_var(rng, dist) * (i == j ? diag_scale : off_scale);
                s.Wr(i, j) = v;
                s.Wr(j, i) = v;
            }
        }
    } else {
        s.Wc.resize(N, N);
        const double part_scale = off_scale / std::sqrt(2.0); // each part variance 1/(2N)
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j <= i; ++j) {
                if (i == j) {
                    s.Wc(i, i) = Complex(draw_unit_var(rng, dist) * diag_scale, 0.0);
                } else {
                    const double re = draw_unit_var(rng, dist) * part_scale;
                    const double im = draw_unit_var(rng, dist) * part_scale;
                    s.Wc(i, j) = Complex(re, im);
                    s.Wc(j, i) = Complex(re, -im);
                }
            }
        }
    }
    return s;
}

CMatrix WignerSample::W() const {
    if (is_real()) return Wr.cast<Complex>();
    return Wc;
}

void WignerSample::ensure_eigen(bool need_vectors) {
    if (has_values && (has_vectors || !need_vectors)) return;
    const auto opts = need_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    if (is_real()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Wr, opts);
        if (es.info() != Eigen::Success) throw NumericError("real symmetric eigendecomposition failed");
        lambda = es.eigenvalues();
        if (need_vectors) Ur = es.eigenvectors();
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(Wc, opts);
        if (es.info() != Eigen::Success) throw NumericError("Hermitian eigendecomposition failed");
        lambda = es.eigenvalues();
        if (need_vectors) Uc = es.eigenvectors();
    }
    has_values = true;
    has_vectors = has_vectors || need_vectors;
}

ObservableSet make_observables(int N, Recipe recipe, std::uint64_t seed, bool real_field) {
    if (N < 2) throw ValidationError("observable dimension N must be >= 2");
    ObservableSet o;
    o.N = N;
    o.recipe = recipe;
    o.seed = seed;
    Rng rng(seed);
    auto draw_hermitian = [&]() {
        CMatrix H(N, N);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j <= i; ++j) {
                if (i == j) {
                    H(i, i) = Complex(rng.next_normal(), 0.0);
                } else if (real_field) {
                    const double v = rng.next_normal();
                    H(i, j) = v;
                    H(j, i) = v;
                } else {
                    const Complex v(rng.next_normal(), rng.next_normal());
                    H(i, j) = v;
                    H(j, i) = std::conj(v);
                }
            }
        }
        return H;
    };
    auto signed_projection = [&]() {
        // diag(+1 .. +1, -1 .. -1) conjugated by the Q factor of a Gaussian
        // matrix, then centred (odd N leaves a trace) and renormalized
        Eigen::VectorXcd d(N);
        for (int i = 0; i < N; ++i) d(i) = (i < N / 2) ? 1.0 : -1.0;
        if (real_field) {
            Eigen::MatrixXd X(N, N);
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) X(i, j) = rng.next_normal();
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
            const Eigen::MatrixXd Q = qr.householderQ();
            return CMatrix(
                (Q * d.real().asDiagonal() * Q.transpose()).cast<Complex>());
        }
        CMatrix X(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) X(i, j) = Complex(rng.next_normal(), rng.next_normal());
        Eigen::HouseholderQR<CMatrix> qr(X);
        const CMatrix Q = qr.householderQ();
        return CMatrix(Q * d.asDiagonal() * Q.adjoint());
    };
    switch (recipe) {
        case Recipe::identity:
            o.primary = CMatrix::Identity(N, N);
            o.has_matrix = true;
            break;
        case Recipe::random_hermitian: {
            CMatrix H = draw_hermitian();
            o.primary = H / spectral_norm_estimate(H);
            o.has_matrix = true;
            break;
        }
        case Recipe::random_hermitian_traceless: {
            CMatrix H = draw_hermitian();
            H -= (H.trace() / static_cast<double>(N)) * CMatrix::Identity(N, N);
            o.primary = H / spectral_norm_estimate(H);
            o.has_matrix = true;
            break;
        }
        case Recipe::signed_projection_traceless: {
            CMatrix A = signed_projection();
            A -= (A.trace() / static_cast<double>(N)) * CMatrix::Identity(N, N);
            o.primary = A / spectral_norm_estimate(A);
            o.has_matrix = true;
            break;
        }
        case Recipe::random_unit_vectors:
            break;
    }
    o.x.resize(N);
    o.y.resize(N);
    for (int i = 0; i < N; ++i) o.x(i) = Complex(rng.next_normal(), rng.next_normal());
    for (int i = 0; i < N; ++i) o.y(i) = Complex(rng.next_normal(), rng.next_normal());
    o.x.normalize();
    o.y.normalize();
    return o;
}

namespace {

void require_vectors(const WignerSample& s) {
    if (!s.has_vectors)
        throw ValidationError("operation needs eigenvectors; call ensure_eigen() first");
}

} // namespace

CMatrix rotate_to_eigenbasis(const WignerSample& s, const CMatrix& B) {
    require_vectors(s);
    if (s.is_real()) {
        const Eigen::MatrixXd re = B.real();
        Eigen::MatrixXd out_re = s.Ur.transpose() * re * s.Ur;
        if (B.imag().isZero(0.0)) return out_re.cast<Complex>();
        const Eigen::MatrixXd im = B.imag();
        Eigen::MatrixXd out_im = s.Ur.transpose() * im * s.Ur;
        CMatrix out(B.rows(), B.cols());
        out.real() = out_re;
        out.imag() = out_im;
        return out;
    }
    return s.Uc.adjoint() * B * s.Uc;
}

CVector eigenbasis_diag(const WignerSample& s, const CMatrix& B) {
    require_vectors(s);
    const int N = s.N;
    CVector d(N);
    if (s.is_real()) {
        const Eigen::MatrixXd Xre = B.real() * s.Ur;
        if (B.imag().isZero(0.0)) {
            for (int i = 0; i < N; ++i) d(i) = Complex(s.Ur.col(i).dot(Xre.col(i)), 0.0);
        } else {
            const Eigen::MatrixXd Xim = B.imag() * s.Ur;
            for (int i = 0; i < N; ++i)
                d(i) = Complex(s.Ur.col(i).dot(Xre.col(i)), s.Ur.col(i).dot(Xim.col(i)));
        }
    } else {
        const CMatrix X = B * s.Uc;
        for (int i = 0; i < N; ++i) d(i) = s.Uc.col(i).dot(X.col(i));
    }
    return d;
}

CVector rotate_vector(const WignerSample& s, const CVector& v) {
    require_vectors(s);
    if (s.is_real()) {
        const Eigen::VectorXd re = s.Ur.transpose() * v.real();
        const Eigen::VectorXd im = s.Ur.transpose() * v.imag();
        CVector out(v.size());
        out.real() = re;
        out.imag() = im;
        return out;
    }
    return s.Uc.adjoint() * v;
}

Complex resolvent_trace(WignerSample& s, Complex z) {
    s.ensure_eigen(false);
    Complex acc = 0.0;
    for (int i = 0; i < s.N; ++i) acc += 1.0 / (s.lambda(i) - z);
    return acc / static_cast<double>(s.N);
}

ChainEvaluator::ChainEvaluator(WignerSample& s, std::span<const CMatrix> mats) : s_(&s) {
    s.ensure_eigen(true);
    rot_.reserve(mats.size());
    for (std::size_t i = 0; i < mats.size(); ++i) {
        const CMatrix& B = mats[i];
        if (B.rows() != s.N || B.cols() != s.N)
            throw ValidationError("chain matrix dimension mismatch with sample");
        // chains like <f(W) A g(W) A> repeat a matrix; rotate it once
        std::size_t dup = i;
        for (std::size_t j = 0; j < i; ++j) {
            if (mats[j].data() == B.data() || (mats[j].array() == B.array()).all()) {
                dup = j;
                break;
            }
        }
        rot_.push_back(dup < i ? rot_[dup] : rotate_to_eigenbasis(s, B));
    }
}

Eigen::VectorXcd ChainEvaluator::kernel_diag(const SpectralKernel& k) const {
    const int N = s_->N;
    Eigen::VectorXcd d(N);
    if (k.kind == SpectralKernel::Kind::resolvent) {
        for (int i = 0; i < N; ++i) d(i) = 1.0 / (s_->lambda(i) - k.z);
    } else {
        for (int i = 0; i < N; ++i) d(i) = Complex(1.0 / std::abs(s_->lambda(i) - k.z), 0.0);
    }
    return d;
}

const CMatrix& ChainEvaluator::pair_table() const {
    if (!pair_ready_) {
        pair_ = rot_[0].cwiseProduct(rot_[1].transpose());
        pair_ready_ = true;
    }
    return pair_;
}

Complex ChainEvaluator::avg(std::span<const SpectralKernel> kernels) const {
    const int k = static_cast<int>(kernels.size());
    if (k != n_matrices())
        throw ValidationError("averaged chain needs as many kernels as matrices");
    const int N = s_->N;
    std::vector<Eigen::VectorXcd> d;
    d.reserve(static_cast<std::size_t>(k));
    for (const auto& kk : kernels) d.push_back(kernel_diag(kk));
    if (k == 1) {
        Complex acc = 0.0;
        for (int i = 0; i < N; ++i) acc += d[0](i) * rot_[0](i, i);
        return acc / static_cast<double>(N);
    }
    if (k == 2) {
        const CMatrix& T = pair_table();
        return (d[0].transpose() * (T * d[1])).value() / static_cast<double>(N);
    }
    CMatrix X = d[0].asDiagonal() * rot_[0];
    for (int i = 1; i + 1 < k; ++i) X = X * (d[static_cast<std::size_t>(i)].asDiagonal() * rot_[static_cast<std::size_t>(i)]);
    // trace(X * D_k B_k) without forming the product
    const CMatrix& last = rot_[static_cast<std::size_t>(k) - 1];
    Complex acc = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) acc += X(i, j) * d[static_cast<std::size_t>(k) - 1](j) * last(j, i);
    return acc / static_cast<double>(N);
}

Complex ChainEvaluator::iso(std::span<const SpectralKernel> kernels, const CVector& x, const CVector& y) const {
    const int k = n_matrices();
    if (static_cast<int>(kernels.size()) != k + 1)
        throw ValidationError("isotropic chain needs one more kernel than matrices");
    const CVector xr = rotate_vector(*s_, x);
    CVector w = rotate_vector(*s_, y);
    w = kernel_diag(kernels[static_cast<std::size_t>(k)]).cwiseProduct(w);
    for (int i = k - 1; i >= 0; --i) {
        w = rot_[static_cast<std::size_t>(i)] * w;
        w = kernel_diag(kernels[static_cast<std::size_t>(i)]).cwiseProduct(w);
    }
    return xr.dot(w);
}

namespace {

Eigen::VectorXcd function_diag(const Eigen::VectorXd& lambda, const FunctionKernel& f) {
    if (!f.f) throw ValidationError("empty function kernel");
    Eigen::VectorXcd d(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) d(i) = f.f(lambda(i));
    return d;
}

} // namespace

Complex ChainEvaluator::fw_avg(std::span<const FunctionKernel> fns) const {
    const int k = static_cast<int>(fns.size());
    if (k != n_matrices())
        throw ValidationError("averaged function chain needs as many functions as matrices");
    const int N = s_->N;
    std::vector<Eigen::VectorXcd> d;
    d.reserve(static_cast<std::size_t>(k));
    for (const auto& f : fns) d.push_back(function_diag(s_->lambda, f));
    if (k == 1) {
        Complex acc = 0.0;
        for (int i = 0; i < N; ++i) acc += d[0](i) * rot_[0](i, i);
        return acc / static_cast<double>(N);
    }
    if (k == 2) {
        const CMatrix& T = pair_table();
        return (d[0].transpose() * (T * d[1])).value() / static_cast<double>(N);
    }
    CMatrix X = d[0].asDiagonal() * rot_[0];
    for (int i = 1; i + 1 < k; ++i) X = X * (d[static_cast<std::size_t>(i)].asDiagonal() * rot_[static_cast<std::size_t>(i)]);
    const CMatrix& last = rot_[static_cast<std::size_t>(k) - 1];
    Complex acc = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) acc += X(i, j) * d[static_cast<std::size_t>(k) - 1](j) * last(j, i);
    return acc / static_cast<double>(N);
}

Complex ChainEvaluator::fw_iso(std::span<const FunctionKernel> fns, const CVector& x, const CVector& y) const {
    const int k = n_matrices();
    if (static_cast<int>(fns.size()) != k + 1)
        throw ValidationError("isotropic function chain needs one more function than matrices");
    const CVector xr = rotate_vector(*s_, x);
    CVector w = rotate_vector(*s_, y);
    w = function_diag(s_->lambda, fns[static_cast<std::size_t>(k)]).cwiseProduct(w);
    for (int i = k - 1; i >= 0; --i) {
        w = rot_[static_cast<std::size_t>(i)] * w;
        w = function_diag(s_->lambda, fns[static_cast<std::size_t>(i)]).cwiseProduct(w);
    }
    return xr.dot(w);
}

Complex ChainEvaluator::heisenberg(double t) const {
    if (n_matrices() != 2) throw ValidationError("heisenberg evaluation needs exactly two matrices");
    const int N = s_->N;
    const CMatrix& T = pair_table();
    Eigen::VectorXcd p(N), q(N);
    for (int i = 0; i < N; ++i) {
        const double a = t * s_->lambda(i);
        p(i) = Complex(std::cos(a), std::sin(a));
        q(i) = std::conj(p(i));
    }
    return (p.transpose() * (T * q)).value() / static_cast<double>(N);
}

Complex chain_avg(WignerSample& s, const ChainSpec& chain) {
    if (chain.form() != ChainSpec::Form::averaged)
        throw ValidationError("chain_avg needs an averaged-form chain");
    ChainEvaluator ev(s, chain.matrices);
    return ev.avg(chain.kernels);
}

Complex chain_iso(WignerSample& s, const ChainSpec& chain, const CVector& x, const CVector& y) {
    if (chain.form() != ChainSpec::Form::matrix)
        throw ValidationError("chain_iso needs a matrix-form chain");
    ChainEvaluator ev(s, chain.matrices);
    return ev.iso(chain.kernels, x, y);
}

namespace {

std::vector<CMatrix> direct_resolvents(const WignerSample& s, std::span<const SpectralKernel> kernels) {
    const CMatrix W = s.W();
    const CMatrix I = CMatrix::Identity(s.N, s.N);
    std::vector<CMatrix> g;
    g.reserve(kernels.size());
    for (const auto& k : kernels) {
        const CMatrix shifted = W - k.z * I;
        if (k.kind == SpectralKernel::Kind::resolvent) {
            g.push_back(shifted.partialPivLu().solve(I));
        } else {
            // |W - z|^{-1} = ((W-z)(W-z)^*)^{-1/2}; small-N cross-check path
            Eigen::SelfAdjointEigenSolver<CMatrix> es(shifted * shifted.adjoint());
            if (es.info() != Eigen::Success) throw NumericError("absolute-kernel direct path failed");
            g.push_back(es.eigenvectors() *
                        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>() *
                        es.eigenvectors().adjoint());
        }
    }
    return g;
}

} // namespace

Complex chain_avg_direct(const WignerSample& s, const ChainSpec& chain) {
    if (chain.form() != ChainSpec::Form::averaged)
        throw ValidationError("chain_avg_direct needs an averaged-form chain");
    const auto g = direct_resolvents(s, chain.kernels);
    CMatrix P = CMatrix::Identity(s.N, s.N);
    for (std::size_t i = 0; i < g.size(); ++i) P = P * g[i] * chain.matrices[i];
    return P.trace() / static_cast<double>(s.N);
}

Complex chain_iso_direct(const WignerSample& s, const ChainSpec& chain, const CVector& x, const CVector& y) {
    if (chain.form() != ChainSpec::Form::matrix)
        throw ValidationError("chain_iso_direct needs a matrix-form chain");
    const auto g = direct_resolvents(s, chain.kernels);
    CVector w = g.back() * y;
    for (int i = static_cast<int>(chain.matrices.size()) - 1; i >= 0; --i)
        w = g[static_cast<std::size_t>(i)] * (chain.matrices[static_cast<std::size_t>(i)] * w);
    return x.dot(w);
}

double psi_av(WignerSample& s, const ChainSpec& chain) {
    const double eta = chain.min_eta();
    if (chain.form() == ChainSpec::Form::matrix) {
        if (chain.n_kernels() != 1)
            throw ValidationError("psi_av takes an averaged chain, or a single-kernel chain for the k=0 form");
        const Complex m = stieltjes(chain.kernels[0].z);
        return static_cast<double>(s.N) * eta * std::abs(resolvent_trace(s, chain.kernels[0].z) - m);
    }
    for (bool t : chain.traceless)
        if (!t) throw ValidationError("psi_av requires every chain matrix to be traceless");
    const int k = chain.n_kernels();
    const Complex value = chain_avg(s, chain);
    const Complex det = m_avg(chain);
    return static_cast<double>(s.N) * std::pow(eta, static_cast<double>(k) / 2.0) * std::abs(value - det);
}

double psi_iso(WignerSample& s, const ChainSpec& chain, const CVector& x, const CVector& y) {
    if (chain.form() != ChainSpec::Form::matrix)
        throw ValidationError("psi_iso needs a matrix-form chain");
    for (bool t : chain.traceless)
        if (!t) throw ValidationError("psi_iso requires every chain matrix to be traceless");
    const int k = static_cast<int>(chain.matrices.size());
    const double eta = chain.min_eta();
    const Complex value = chain_iso(s, chain, x, y);
    const ChainValue det = m_matrix(chain);
    const Complex det_xy = x.dot(det.matrix_part * y);
    return std::sqrt(static_cast<double>(s.N) * std::pow(eta, static_cast<double>(k) + 1.0)) * std::abs(value - det_xy);
}

Complex heisenberg_pair(WignerSample& s, double t, const CMatrix& A1, const CMatrix& A2) {
    const CMatrix mats[2] = {A1, A2};
    ChainEvaluator ev(s, mats);
    return ev.heisenberg(t);
}

Complex fw_chain_avg(WignerSample& s, std::span<const FunctionKernel> fns,
                     std::span<const CMatrix> mats) {
    ChainEvaluator ev(s, mats);
    return ev.fw_avg(fns);
}

Complex fw_chain_iso(WignerSample& s, std::span<const FunctionKernel> fns,
                     std::span<const CMatrix> mats, const CVector& x, const CVector& y) {
    ChainEvaluator ev(s, mats);
    return ev.fw_iso(fns, x, y);
}

} // namespace rlab

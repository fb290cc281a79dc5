#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbt/dims.hpp"
#include "pbt/merit.hpp"
#include "pbt/partitions.hpp"
#include "pbt/recycling.hpp"

namespace pbt::oracle {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleOptions {
    long long max_side = 1LL << 14; // refuse operators with side d^n beyond this
    double eig_cutoff = 1e-12;      // relative cutoff for pseudo-inverse square roots
};

inline long long pow_ll(int d, int n) {
    long long side = 1;
    for (int i = 0; i < n; ++i) {
        if (side > (1LL << 62) / d)
            throw BudgetError("operator side d^n does not fit in 63 bits");
        side *= d;
    }
    return side;
}

inline long long checked_side(int n, int d, const OracleOptions& opts) {
    long long side = pow_ll(d, n);
    if (side > opts.max_side)
        throw BudgetError("operator side " + std::to_string(side) + " exceeds budget " +
                          std::to_string(opts.max_side) + " (n=" + std::to_string(n) +
                          ", d=" + std::to_string(d) + ")");
    return side;
}

/// A complex square matrix on a register of n qudits of local dimension d.
struct DenseOperator {
    int n = 0;
    int d = 0;
    CMat mat;
};

namespace detail {

// big-endian digit expansion: qudit 0 is the most significant digit
inline void digits_of(long long idx, int n, int d, std::vector<int>& out) {
    out.assign(static_cast<std::size_t>(n), 0);
    for (int i = n - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<int>(idx % d);
        idx /= d;
    }
}

inline long long index_of(const std::vector<int>& x, int d) {
    long long idx = 0;
    for (int v : x)
        idx = idx * d + v;
    return idx;
}

} // namespace detail

inline DenseOperator identity_op(int n, int d) {
    long long side = pow_ll(d, n);
    return {n, d, CMat::Identity(side, side)};
}

/// Tensor representation of a permutation: sends basis vector |x_0..x_{n-1}>
/// to |y> with y[sigma[i]] = x[i] (0-based images).
inline DenseOperator perm_op(const std::vector<int>& sigma, int n, int d) {
    if (static_cast<int>(sigma.size()) != n)
        throw std::invalid_argument("perm_op: permutation length mismatch");
    long long side = pow_ll(d, n);
    CMat m = CMat::Zero(side, side);
    std::vector<int> x, y(static_cast<std::size_t>(n));
    for (long long idx = 0; idx < side; ++idx) {
        detail::digits_of(idx, n, d, x);
        for (int i = 0; i < n; ++i)
            y[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])] =
                x[static_cast<std::size_t>(i)];
        m(detail::index_of(y, d), idx) = 1.0;
    }
    return {n, d, std::move(m)};
}

inline DenseOperator transposition_op(int i, int j, int n, int d) {
    std::vector<int> sigma(static_cast<std::size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    std::swap(sigma[static_cast<std::size_t>(i)], sigma[static_cast<std::size_t>(j)]);
    return perm_op(sigma, n, d);
}

/// d |psi+><psi+| on qudits (p, q), identity elsewhere; the algebra contraction.
inline DenseOperator contraction_op(int p, int q, int n, int d) {
    if (p == q)
        throw std::invalid_argument("contraction_op: positions must differ");
    long long side = pow_ll(d, n);
    CMat m = CMat::Zero(side, side);
    std::vector<int> x;
    for (long long idx = 0; idx < side; ++idx) {
        detail::digits_of(idx, n, d, x);
        if (x[static_cast<std::size_t>(p)] != x[static_cast<std::size_t>(q)])
            continue;
        for (int k = 0; k < d; ++k) {
            std::vector<int> y = x;
            y[static_cast<std::size_t>(p)] = k;
            y[static_cast<std::size_t>(q)] = k;
            m(detail::index_of(y, d), idx) += 1.0;
        }
    }
    return {n, d, std::move(m)};
}

/// Embed an operator acting on the listed qudits (in that order) into an
/// n-qudit register, identity on the rest.
inline DenseOperator embed(const DenseOperator& op, const std::vector<int>& positions, int n) {
    const int d = op.d;
    const int k = op.n;
    if (static_cast<int>(positions.size()) != k)
        throw std::invalid_argument("embed: positions length mismatch");
    long long side = pow_ll(d, n);
    long long sub = pow_ll(d, k);
    std::vector<int> others;
    for (int i = 0; i < n; ++i)
        if (std::find(positions.begin(), positions.end(), i) == positions.end())
            others.push_back(i);
    long long rest = pow_ll(d, static_cast<int>(others.size()));
    CMat out = CMat::Zero(side, side);
    std::vector<int> rs, cs, ro, xv(static_cast<std::size_t>(n)), yv(static_cast<std::size_t>(n));
    for (long long r = 0; r < sub; ++r) {
        detail::digits_of(r, k, d, rs);
        for (long long c = 0; c < sub; ++c) {
            const auto v = op.mat(r, c);
            if (v == std::complex<double>(0.0, 0.0))
                continue;
            detail::digits_of(c, k, d, cs);
            for (long long t = 0; t < rest; ++t) {
                detail::digits_of(t, static_cast<int>(others.size()), d, ro);
                for (int i = 0; i < k; ++i) {
                    xv[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] =
                        rs[static_cast<std::size_t>(i)];
                    yv[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] =
                        cs[static_cast<std::size_t>(i)];
                }
                for (std::size_t i = 0; i < others.size(); ++i) {
                    xv[static_cast<std::size_t>(others[i])] = ro[i];
                    yv[static_cast<std::size_t>(others[i])] = ro[i];
                }
                out(detail::index_of(xv, d), detail::index_of(yv, d)) += v;
            }
        }
    }
    return {n, d, std::move(out)};
}

/// Apply an operator on the listed qudits to a state vector of n qudits.
inline CVec apply_embedded(const DenseOperator& op, const std::vector<int>& positions, int n,
                           const CVec& state) {
    const int d = op.d;
    const int k = op.n;
    long long side = pow_ll(d, n);
    long long sub = pow_ll(d, k);
    if (state.size() != side)
        throw std::invalid_argument("apply_embedded: state size mismatch");
    CVec out = CVec::Zero(side);
    std::vector<int> x;
    std::vector<long long> weight(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        weight[static_cast<std::size_t>(i)] = pow_ll(d, n - 1 - positions[static_cast<std::size_t>(i)]);
    for (long long idx = 0; idx < side; ++idx) {
        detail::digits_of(idx, n, d, x);
        long long r = 0;
        for (int i = 0; i < k; ++i)
            r = r * d + x[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])];
        // strip the sub-index contribution, then add back each column sub-index
        long long base = idx;
        std::vector<int> rv;
        detail::digits_of(r, k, d, rv);
        for (int i = 0; i < k; ++i)
            base -= rv[static_cast<std::size_t>(i)] * weight[static_cast<std::size_t>(i)];
        std::complex<double> acc = 0.0;
        std::vector<int> cv;
        for (long long c = 0; c < sub; ++c) {
            const auto v = op.mat(r, c);
            if (v == std::complex<double>(0.0, 0.0))
                continue;
            detail::digits_of(c, k, d, cv);
            long long src = base;
            for (int i = 0; i < k; ++i)
                src += cv[static_cast<std::size_t>(i)] * weight[static_cast<std::size_t>(i)];
            acc += v * state(src);
        }
        out(idx) = acc;
    }
    return out;
}

/// Trace out the listed qudits; remaining qudits keep their relative order.
inline DenseOperator partial_trace(const DenseOperator& a, const std::vector<int>& traced) {
    const int d = a.d;
    std::vector<int> keep;
    for (int i = 0; i < a.n; ++i)
        if (std::find(traced.begin(), traced.end(), i) == traced.end())
            keep.push_back(i);
    const int nk = static_cast<int>(keep.size());
    const int nt = static_cast<int>(traced.size());
    long long dk = pow_ll(d, nk);
    long long dt = pow_ll(d, nt);
    CMat out = CMat::Zero(dk, dk);
    std::vector<int> rs, cs, ts, xv(static_cast<std::size_t>(a.n)),
        yv(static_cast<std::size_t>(a.n));
    for (long long r = 0; r < dk; ++r) {
        detail::digits_of(r, nk, d, rs);
        for (long long c = 0; c < dk; ++c) {
            detail::digits_of(c, nk, d, cs);
            std::complex<double> s = 0.0;
            for (long long t = 0; t < dt; ++t) {
                detail::digits_of(t, nt, d, ts);
                for (int i = 0; i < nk; ++i) {
                    xv[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] =
                        rs[static_cast<std::size_t>(i)];
                    yv[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] =
                        cs[static_cast<std::size_t>(i)];
                }
                for (int i = 0; i < nt; ++i) {
                    xv[static_cast<std::size_t>(traced[static_cast<std::size_t>(i)])] =
                        ts[static_cast<std::size_t>(i)];
                    yv[static_cast<std::size_t>(traced[static_cast<std::size_t>(i)])] =
                        ts[static_cast<std::size_t>(i)];
                }
                s += a.mat(detail::index_of(xv, d), detail::index_of(yv, d));
            }
            out(r, c) = s;
        }
    }
    return {nk, d, std::move(out)};
}

namespace detail {

// Sums of the tensor representation over each conjugacy class of S_n.
inline const std::map<std::vector<int>, RMat>& class_sums(int n, int d) {
    static std::map<std::pair<int, int>, std::map<std::vector<int>, RMat>> cache;
    static std::mutex mtx;
    std::lock_guard lock(mtx);
    auto key = std::make_pair(n, d);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;
    long long side = pow_ll(d, n);
    std::map<std::vector<int>, RMat> sums;
    std::vector<int> sigma(static_cast<std::size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    std::vector<int> x, y(static_cast<std::size_t>(n));
    do {
        auto type = cycle_type(sigma).parts();
        auto [it, inserted] = sums.try_emplace(type);
        if (inserted)
            it->second = RMat::Zero(side, side);
        RMat& m = it->second;
        for (long long idx = 0; idx < side; ++idx) {
            digits_of(idx, n, d, x);
            for (int i = 0; i < n; ++i)
                y[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])] =
                    x[static_cast<std::size_t>(i)];
            m(index_of(y, d), idx) += 1.0;
        }
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return cache.emplace(key, std::move(sums)).first->second;
}

} // namespace detail

/// Central idempotent projecting onto the lambda-isotypic component of (C^d)^n:
/// P = (d_lambda / n!) sum_sigma chi^lambda(sigma) R(sigma).
/// A diagram with more than d rows yields the zero operator.
inline DenseOperator young_projector(const Partition& lam, int n, int d) {
    if (lam.weight() != n)
        throw std::invalid_argument("young_projector: |lambda| must equal n");
    long long side = pow_ll(d, n);
    if (lam.rows() > d)
        return {n, d, CMat::Zero(side, side)};
    RMat acc = RMat::Zero(side, side);
    const BigInt dl = dim_sym(lam);
    for (const auto& [type, sum] : detail::class_sums(n, d)) {
        const Rational coeff =
            Rational(dl * char_sym(lam, Partition(type)), factorial(n));
        if (coeff != 0)
            acc += to_double(coeff) * sum;
    }
    return {n, d, acc.cast<std::complex<double>>()};
}

struct SqrtInfo {
    double min_eigenvalue = 0.0;
    int clamped = 0; // eigenvalues below the cutoff treated as zero
};

namespace detail {

inline DenseOperator psd_function(const DenseOperator& a, double cutoff, bool inverse,
                                  SqrtInfo* info) {
    CMat herm = (a.mat + a.mat.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(herm);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("psd_sqrt: eigensolver failed");
    const auto& w = es.eigenvalues();
    const double wmax = std::max(w.maxCoeff(), 0.0);
    const double floor = cutoff * std::max(wmax, 1.0);
    const double neg_limit = 1e-8 * std::max(wmax, 1.0);
    if (w.minCoeff() < -neg_limit)
        throw std::invalid_argument("psd_sqrt: eigenvalue " + std::to_string(w.minCoeff()) +
                                    " is significantly negative");
    Eigen::VectorXd vals(w.size());
    int clamped = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) <= floor) {
            vals(i) = 0.0;
            if (w(i) < 0.0)
                ++clamped;
        } else {
            vals(i) = inverse ? 1.0 / std::sqrt(w(i)) : std::sqrt(w(i));
        }
    }
    if (info)
        *info = {w.minCoeff(), clamped};
    CMat out = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
    return {a.n, a.d, std::move(out)};
}

} // namespace detail

inline DenseOperator psd_sqrt(const DenseOperator& a, double cutoff = 1e-12,
                              SqrtInfo* info = nullptr) {
    return detail::psd_function(a, cutoff, false, info);
}

/// Pseudo-inverse square root on the support of a (kernel stays kernel).
inline DenseOperator psd_pinv_sqrt(const DenseOperator& a, double cutoff = 1e-12,
                                   SqrtInfo* info = nullptr) {
    return detail::psd_function(a, cutoff, true, info);
}

/// O = sum_mu sqrt(c_mu) P_mu on N qudits with c_mu = f_mu d^N / (d_mu m_mu).
inline DenseOperator resource_operator(int N, int d, const ResourceWeights& w) {
    if (w.N != N || w.d != d)
        throw std::invalid_argument("resource_operator: weights do not match (N, d)");
    long long side = pow_ll(d, N);
    BigInt dn = 1;
    for (int i = 0; i < N; ++i)
        dn *= d;
    CMat out = CMat::Zero(side, side);
    for (std::size_t i = 0; i < w.support.size(); ++i) {
        if (w.f[i] == 0)
            continue;
        const auto& mu = w.support[i];
        const Rational c = w.f[i] * Rational(dn, dim_sym(mu) * dim_gl(mu, d));
        out += std::sqrt(to_double(c)) * young_projector(mu, N, d).mat;
    }
    return {N, d, std::move(out)};
}

/// The optimal resource operator at port count M (used for the refreshed resource).
inline DenseOperator level_resource_operator(int M, int d) {
    long long side = pow_ll(d, M);
    CMat out = CMat::Zero(side, side);
    for (const auto& lam : enum_partitions(M, d))
        out += std::sqrt(to_double(resource_coefficient(lam, d))) *
               young_projector(lam, M, d).mat;
    return {M, d, std::move(out)};
}

enum class ResourceScheme { epr, optimized };

inline ResourceWeights scheme_weights(int N, int d, ResourceScheme scheme) {
    return scheme == ResourceScheme::epr ? epr_weights(N, d) : optimal_ppbt_weights(N, d);
}

/// Pure resource state density matrix on 2N qudits (A = 0..N-1, B = N..2N-1).
inline DenseOperator build_resource(int N, int d, const ResourceWeights& w,
                                    const OracleOptions& opts = {}) {
    long long side = checked_side(2 * N, d, opts);
    CVec psi = CVec::Zero(side);
    // product of EPR pairs (A_i, B_i), then the Schmidt-shaping operator on A
    std::vector<int> x(static_cast<std::size_t>(2 * N));
    long long dn = pow_ll(d, N);
    for (long long a = 0; a < dn; ++a) {
        std::vector<int> av;
        detail::digits_of(a, N, d, av);
        for (int i = 0; i < N; ++i) {
            x[static_cast<std::size_t>(i)] = av[static_cast<std::size_t>(i)];
            x[static_cast<std::size_t>(N + i)] = av[static_cast<std::size_t>(i)];
        }
        psi(detail::index_of(x, d)) = 1.0 / std::sqrt(double(dn));
    }
    std::vector<int> apos(static_cast<std::size_t>(N));
    std::iota(apos.begin(), apos.end(), 0);
    psi = apply_embedded(resource_operator(N, d, w), apos, 2 * N, psi);
    return {2 * N, d, psi * psi.adjoint()};
}

/// POVM on n qudits; element 0 is the failure effect, element i the i-th port.
struct PovmSet {
    int n = 0;
    int d = 0;
    std::vector<DenseOperator> elements;
};

/// Pretty good measurement for ports 0..N-1 with the message qudit at position N.
inline PovmSet pgm_povm(int N, int d, const OracleOptions& opts = {}) {
    const int n = N + 1;
    checked_side(n, d, opts);
    std::vector<DenseOperator> rhos;
    rhos.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        rhos.push_back(contraction_op(i, N, n, d));
    CMat rho = CMat::Zero(rhos[0].mat.rows(), rhos[0].mat.cols());
    for (const auto& r : rhos)
        rho += r.mat;
    DenseOperator ris = psd_pinv_sqrt({n, d, std::move(rho)}, opts.eig_cutoff);
    PovmSet povm{n, d, {}};
    povm.elements.resize(static_cast<std::size_t>(N + 1));
    CMat total = CMat::Zero(ris.mat.rows(), ris.mat.cols());
    for (int i = 0; i < N; ++i) {
        CMat e = ris.mat * rhos[static_cast<std::size_t>(i)].mat * ris.mat;
        total += e;
        povm.elements[static_cast<std::size_t>(i + 1)] = {n, d, std::move(e)};
    }
    povm.elements[0] = {n, d, CMat::Identity(ris.mat.rows(), ris.mat.cols()) - total};
    return povm;
}

/// Measurement of the EPR-resource probabilistic protocol:
/// Pi_i = psi+_{A_i, msg} (x) Theta on the other ports, Theta = sum (d/gamma) P_lambda.
inline PovmSet std_ppbt_povm(int N, int d, const OracleOptions& opts = {}) {
    const int n = N + 1;
    checked_side(n, d, opts);
    long long theta_side = pow_ll(d, N - 1);
    CMat theta = CMat::Zero(theta_side, theta_side);
    for (const auto& lam : enum_partitions(N - 1, d))
        theta += (double(d) / gamma_row(lam, d)) * young_projector(lam, N - 1, d).mat;
    DenseOperator theta_op{N - 1, d, std::move(theta)};
    PovmSet povm{n, d, {}};
    povm.elements.resize(static_cast<std::size_t>(N + 1));
    long long side = pow_ll(d, n);
    CMat total = CMat::Zero(side, side);
    for (int i = 0; i < N; ++i) {
        std::vector<int> rest;
        for (int p = 0; p < N; ++p)
            if (p != i)
                rest.push_back(p);
        CMat e = (contraction_op(i, N, n, d).mat / double(d)) * embed(theta_op, rest, n).mat;
        total += e;
        povm.elements[static_cast<std::size_t>(i + 1)] = {n, d, std::move(e)};
    }
    povm.elements[0] = {n, d, CMat::Identity(side, side) - total};
    return povm;
}

struct PovmValidity {
    std::vector<double> min_eigenvalues;
    double completeness_residual = 0.0;
};

inline PovmValidity povm_validity(const PovmSet& povm) {
    PovmValidity v;
    CMat total;
    for (const auto& e : povm.elements) {
        CMat herm = (e.mat + e.mat.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
        v.min_eigenvalues.push_back(es.eigenvalues().minCoeff());
        if (total.size() == 0)
            total = e.mat;
        else
            total += e.mat;
    }
    v.completeness_residual =
        (total - CMat::Identity(total.rows(), total.cols())).cwiseAbs().maxCoeff();
    return v;
}

/// Entanglement fidelity of the two-step channel, evaluated as a dense trace
/// on N+2 qudits (ports 0..N-1, first message at N, second message at N+1).
inline double oracle_two_step_fidelity(int N, int d, const ResourceWeights& w,
                                       const OracleOptions& opts = {}) {
    const int n = N + 2;
    checked_side(n, d, opts);
    if (N < 2)
        throw std::invalid_argument("oracle_two_step_fidelity: need N >= 2");

    PovmSet first = pgm_povm(N, d, opts);
    DenseOperator sqrt_pi = psd_sqrt(first.elements[static_cast<std::size_t>(N)],
                                     opts.eig_cutoff);
    std::vector<int> first_pos(static_cast<std::size_t>(N + 1));
    std::iota(first_pos.begin(), first_pos.end(), 0);
    CMat sq = embed(sqrt_pi, first_pos, n).mat;

    PovmSet second = pgm_povm(N - 1, d, opts);
    std::vector<int> second_pos;
    for (int p = 0; p < N - 1; ++p)
        second_pos.push_back(p);
    second_pos.push_back(N + 1);
    CMat pi2 = embed(second.elements[static_cast<std::size_t>(N - 1)], second_pos, n).mat;

    CMat tau2 = contraction_op(N - 1, N, n, d).mat * contraction_op(N - 2, N + 1, n, d).mat;
    std::vector<int> apos(static_cast<std::size_t>(N));
    std::iota(apos.begin(), apos.end(), 0);
    CMat o = embed(resource_operator(N, d, w), apos, n).mat;

    const double scale = double(N) * (N - 1) / double(pow_ll(d, N + 4));
    return scale * (o * sq * pi2 * sq * o * tau2).trace().real();
}

/// Success probability through the dense channel on the maximally mixed input.
inline double oracle_p_succ(int N, int d, const ResourceWeights& w,
                            const OracleOptions& opts = {}) {
    const int n1 = N + 1;
    checked_side(n1, d, opts);
    if (N < 2)
        throw std::invalid_argument("oracle_p_succ: need N >= 2");

    PovmSet first = pgm_povm(N, d, opts);
    CMat sq = psd_sqrt(first.elements[static_cast<std::size_t>(N)], opts.eig_cutoff).mat;
    std::vector<int> apos(static_cast<std::size_t>(N));
    std::iota(apos.begin(), apos.end(), 0);
    CMat o = embed(resource_operator(N, d, w), apos, n1).mat;
    DenseOperator t1{n1, d, sq * o * o * sq};
    DenseOperator t1r = partial_trace(t1, {N - 1, N}); // drop the used port and the message

    PovmSet second = pgm_povm(N - 1, d, opts);
    CMat succ_sum = CMat::Zero(second.elements[0].mat.rows(), second.elements[0].mat.cols());
    for (int j = 1; j <= N - 1; ++j)
        succ_sum += second.elements[static_cast<std::size_t>(j)].mat;
    DenseOperator t2r = partial_trace({N, d, std::move(succ_sum)}, {N - 1});

    const double scale = double(N) / double(pow_ll(d, N + 2));
    return scale * (t1r.mat * t2r.mat).trace().real();
}

struct ChannelEval {
    double f_ent = 0.0;
    double p_succ = 0.0;
};

/// Fully unreduced evaluation: runs the channel as a state-vector simulation
/// over every outcome pair (i, j), with no symmetry shortcut. Registers:
/// A = 0..N-1, B = N..2N-1, messages at 2N, 2N+1, references at 2N+2, 2N+3.
inline ChannelEval oracle_channel_unreduced(int N, int d, const ResourceWeights& w,
                                            const OracleOptions& opts = {}) {
    const int n = 2 * N + 4;
    long long side = checked_side(n, d, opts);

    CVec input = CVec::Zero(side);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < N; ++i)
        pairs.emplace_back(i, N + i);
    pairs.emplace_back(2 * N, 2 * N + 2);
    pairs.emplace_back(2 * N + 1, 2 * N + 3);
    long long configs = pow_ll(d, static_cast<int>(pairs.size()));
    std::vector<int> ks, x(static_cast<std::size_t>(n));
    for (long long c = 0; c < configs; ++c) {
        detail::digits_of(c, static_cast<int>(pairs.size()), d, ks);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            x[static_cast<std::size_t>(pairs[i].first)] = ks[i];
            x[static_cast<std::size_t>(pairs[i].second)] = ks[i];
        }
        input(detail::index_of(x, d)) = 1.0;
    }
    input /= std::pow(double(d), pairs.size() / 2.0);
    std::vector<int> apos(static_cast<std::size_t>(N));
    std::iota(apos.begin(), apos.end(), 0);
    input = apply_embedded(resource_operator(N, d, w), apos, n, input);

    PovmSet first = pgm_povm(N, d, opts);
    ChannelEval eval;
    for (int i = 0; i < N; ++i) {
        std::vector<int> pos1;
        for (int p = 0; p < N; ++p)
            pos1.push_back(p);
        pos1.push_back(2 * N);
        CVec v1 = apply_embedded(psd_sqrt(first.elements[static_cast<std::size_t>(i + 1)],
                                          opts.eig_cutoff),
                                 pos1, n, input);
        std::vector<int> ports2;
        for (int p = 0; p < N; ++p)
            if (p != i)
                ports2.push_back(p);
        // second-round PGM on the remaining ports with the second message
        const int n2 = N;
        std::vector<DenseOperator> rhos;
        for (int p = 0; p < N - 1; ++p)
            rhos.push_back(contraction_op(p, N - 1, n2, d));
        CMat rho = CMat::Zero(rhos[0].mat.rows(), rhos[0].mat.cols());
        for (const auto& r : rhos)
            rho += r.mat;
        CMat ris = psd_pinv_sqrt({n2, d, std::move(rho)}, opts.eig_cutoff).mat;
        std::vector<int> pos2 = ports2;
        pos2.push_back(2 * N + 1);
        for (std::size_t jj = 0; jj < ports2.size(); ++jj) {
            const int j = ports2[jj];
            CMat eff = ris * rhos[jj].mat * ris;
            CVec v2 = apply_embedded(psd_sqrt({n2, d, std::move(eff)}, opts.eig_cutoff),
                                     pos2, n, v1);
            eval.p_succ += v2.squaredNorm();
            // overlap with psi+_{B_i, R1} (x) psi+_{B_j, R2}
            DenseOperator proj1 = contraction_op(0, 1, 2, d);
            proj1.mat /= double(d);
            CVec u = apply_embedded(proj1, {N + i, 2 * N + 2}, n, v2);
            u = apply_embedded(proj1, {N + j, 2 * N + 3}, n, u);
            eval.f_ent += v2.dot(u).real();
        }
    }
    return eval;
}

enum class Branch { success, failure };

/// Conditional recycling fidelity through dense traces on N+1 qudits.
/// Returns nullopt when the requested branch has vanishing probability.
inline std::optional<double> oracle_recycling(int N, int d, RecyclingScheme scheme,
                                              Branch branch, const OracleOptions& opts = {}) {
    const int n = N + 1;
    checked_side(n, d, opts);
    if (N < 1 || (N < 2 && scheme == RecyclingScheme::standard))
        throw std::invalid_argument("oracle_recycling: port count too small");

    PovmSet povm = scheme == RecyclingScheme::standard ? std_ppbt_povm(N, d, opts)
                                                       : pgm_povm(N, d, opts);
    const double dn1 = double(pow_ll(d, N + 1));
    if (branch == Branch::success) {
        const DenseOperator& pi = povm.elements[static_cast<std::size_t>(N)];
        CMat sq = psd_sqrt(pi, opts.eig_cutoff).mat;
        CMat sigma = contraction_op(N - 1, N, n, d).mat;
        if (scheme == RecyclingScheme::standard) {
            const double num = (sq * sigma).trace().real();
            const double den = pi.mat.trace().real();
            return num / std::sqrt(den) / std::sqrt(dn1);
        }
        std::vector<int> apos(static_cast<std::size_t>(N));
        std::iota(apos.begin(), apos.end(), 0);
        CMat oa = embed(level_resource_operator(N, d), apos, n).mat;
        std::vector<int> tpos(static_cast<std::size_t>(N - 1));
        std::iota(tpos.begin(), tpos.end(), 0);
        CMat ot = embed(level_resource_operator(N - 1, d), tpos, n).mat;
        const double num = (sigma * sq * oa * ot).trace().real();
        const double den = (pi.mat * oa * oa).trace().real();
        return num / std::sqrt(den) / std::sqrt(dn1);
    }
    const DenseOperator& pi0 = povm.elements[0];
    CMat sq0 = psd_sqrt(pi0, opts.eig_cutoff).mat;
    if (scheme == RecyclingScheme::standard) {
        const double tr0 = pi0.mat.trace().real();
        if (tr0 < 1e-9 * dn1)
            return std::nullopt;
        return sq0.trace().real() / std::sqrt(tr0) / std::sqrt(dn1);
    }
    std::vector<int> apos(static_cast<std::size_t>(N));
    std::iota(apos.begin(), apos.end(), 0);
    CMat oa = embed(level_resource_operator(N, d), apos, n).mat;
    const double tr0 = (oa * pi0.mat * oa).trace().real();
    if (tr0 < 1e-9 * dn1)
        return std::nullopt;
    return (oa * sq0 * oa).trace().real() / std::sqrt(tr0) / std::sqrt(dn1);
}

} // namespace pbt::oracle

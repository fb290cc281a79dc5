#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbt/dims.hpp"
#include "pbt/eig.hpp"
#include "pbt/partitions.hpp"

namespace pbt {

/// Schmidt profile of the shared resource state: a probability vector over
/// the partitions of N with at most d rows, in canonical order.
struct ResourceWeights {
    int N = 0;
    int d = 0;
    std::vector<Partition> support; // enum_partitions(N, d)
    std::vector<Rational> f;        // same order, sums to 1

    const Rational& at(const Partition& mu) const { return f[partition_index(support, mu)]; }
};

inline ResourceWeights make_weights(int N, int d, std::vector<Rational> f) {
    ResourceWeights w{N, d, enum_partitions(N, d), std::move(f)};
    if (w.f.size() != w.support.size())
        throw std::invalid_argument("make_weights: expected " +
                                    std::to_string(w.support.size()) + " weights");
    Rational sum = 0;
    for (const auto& x : w.f) {
        if (x < 0)
            throw std::invalid_argument("make_weights: negative weight");
        sum += x;
    }
    if (sum != 1)
        throw std::invalid_argument("make_weights: weights sum to " + sum.str() + ", not 1");
    return w;
}

/// f_mu = m_mu^2 / sum_nu m_nu^2, the optimal single-round pPBT profile.
inline ResourceWeights optimal_ppbt_weights(int N, int d) {
    if (N < 1 || d < 1)
        throw std::invalid_argument("optimal_ppbt_weights: need N >= 1, d >= 1");
    auto mus = enum_partitions(N, d);
    BigInt total = 0;
    for (const auto& mu : mus)
        total += dim_gl(mu, d) * dim_gl(mu, d);
    std::vector<Rational> f;
    f.reserve(mus.size());
    for (const auto& mu : mus)
        f.emplace_back(dim_gl(mu, d) * dim_gl(mu, d), total);
    return make_weights(N, d, std::move(f));
}

/// f_mu = d_mu m_mu / d^N, the Schmidt profile of N EPR pairs.
inline ResourceWeights epr_weights(int N, int d) {
    if (N < 1 || d < 1)
        throw std::invalid_argument("epr_weights: need N >= 1, d >= 1");
    auto mus = enum_partitions(N, d);
    BigInt dn = 1;
    for (int i = 0; i < N; ++i)
        dn *= d;
    std::vector<Rational> f;
    f.reserve(mus.size());
    for (const auto& mu : mus)
        f.emplace_back(dim_sym(mu) * dim_gl(mu, d), dn);
    return make_weights(N, d, std::move(f));
}

/// q(a|lambda) = d_{lambda+a} / (N d_lambda) with the protocol port count N.
inline Rational q_measure(Cell a, const Partition& lam, int N, int d) {
    auto cells = addable_cells(lam, d);
    if (std::find(cells.begin(), cells.end(), a) == cells.end())
        throw std::invalid_argument("q_measure: cell not addable to " + lam.str() +
                                    " within " + std::to_string(d) + " rows");
    return Rational(dim_sym(add_cell(lam, a)), BigInt(N) * dim_sym(lam));
}

/// Second-round overlap block, indexed by the addable cells of nu (nu has N-2 boxes).
/// Contents of distinct addable cells differ by at least 2, so no denominator vanishes.
inline Eigen::MatrixXd h_block(const Partition& nu, int N, int d) {
    if (nu.weight() != N - 2)
        throw std::invalid_argument("h_block: nu must have N-2 boxes");
    auto ac = addable_cells(nu, d);
    const int m = static_cast<int>(ac.size());
    Eigen::MatrixXd h(m, m);
    for (int i = 0; i < m; ++i) {
        const Cell a = ac[i];
        const Partition la = add_cell(nu, a);
        double diag = 0.0;
        for (Cell b : addable_cells(la, d)) {
            const int gap = content(a) - content(b);
            if (gap == 0)
                throw std::logic_error("h_block: equal contents for nested addable cells");
            diag += std::sqrt(double(d + content(b)) / double(d + content(a))) *
                    to_double(q_measure(b, la, N, d)) / double(gap * gap);
        }
        h(i, i) = diag;
        for (int j = 0; j < m; ++j) {
            if (j == i)
                continue;
            const Cell ap = ac[j];
            const Partition lap = add_cell(nu, ap);
            const int gap = content(a) - content(ap);
            h(i, j) = std::sqrt(to_double(q_measure(a, lap, N, d) * q_measure(ap, la, N, d))) *
                      (1.0 - 1.0 / double(gap * gap));
        }
    }
    return h;
}

/// Selection block mapping level-N partitions to the addable cells of nu.
/// S_{a,mu} = [mu reachable from nu+a] / sqrt(q2(a|nu) * sum_b q(b|nu+a)), where
/// q2 is the branching measure of the second round, whose port count is N-1.
inline Eigen::MatrixXd s_block(const Partition& nu, int N, int d) {
    if (nu.weight() != N - 2)
        throw std::invalid_argument("s_block: nu must have N-2 boxes");
    auto ac = addable_cells(nu, d);
    auto mus = enum_partitions(N, d);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<int>(ac.size()),
                                              static_cast<int>(mus.size()));
    for (std::size_t i = 0; i < ac.size(); ++i) {
        const Partition la = add_cell(nu, ac[i]);
        const Rational q2(dim_sym(la), BigInt(N - 1) * dim_sym(nu));
        Rational qsum = 0;
        for (Cell b : addable_cells(la, d))
            qsum += q_measure(b, la, N, d);
        const double entry = std::sqrt(to_double(1 / (q2 * qsum)));
        for (Cell b : addable_cells(la, d)) {
            auto j = partition_index(mus, add_cell(la, b));
            s(static_cast<int>(i), static_cast<int>(j)) = entry;
        }
    }
    return s;
}

/// The teleportation matrix of the two-step channel and its per-block factors.
struct MeritMatrixBundle {
    int N = 0;
    int d = 0;
    std::vector<Partition> nus; // partitions of N-2, canonical order
    std::vector<Partition> mus; // partitions of N, canonical order
    std::vector<Eigen::MatrixXd> h_blocks, s_blocks, x_blocks;
    Eigen::MatrixXd m; // sum over nu of X^T X; symmetric PSD
};

inline MeritMatrixBundle build_merit_matrix(int N, int d) {
    if (N < 2 || d < 1)
        throw std::invalid_argument("build_merit_matrix: need N >= 2, d >= 1");
    MeritMatrixBundle bundle;
    bundle.N = N;
    bundle.d = d;
    bundle.nus = enum_partitions(N - 2, d);
    bundle.mus = enum_partitions(N, d);
    const int p = static_cast<int>(bundle.mus.size());
    bundle.m = Eigen::MatrixXd::Zero(p, p);
    for (const auto& nu : bundle.nus) {
        Eigen::MatrixXd h = h_block(nu, N, d);
        Eigen::MatrixXd s = s_block(nu, N, d);
        Eigen::MatrixXd x = h * s;
        bundle.m += x.transpose() * x;
        bundle.h_blocks.push_back(std::move(h));
        bundle.s_blocks.push_back(std::move(s));
        bundle.x_blocks.push_back(std::move(x));
    }
    return bundle;
}

inline double two_step_fidelity(const MeritMatrixBundle& bundle, const ResourceWeights& w) {
    if (w.N != bundle.N || w.d != bundle.d)
        throw std::invalid_argument("two_step_fidelity: weights do not match (N, d)");
    const int p = static_cast<int>(bundle.mus.size());
    Eigen::VectorXd v(p);
    for (int i = 0; i < p; ++i) {
        if (w.f[i] < 0)
            throw std::invalid_argument("two_step_fidelity: negative weight");
        v(i) = std::sqrt(to_double(w.f[i]));
    }
    const double d4 = std::pow(double(bundle.d), 4.0);
    return v.dot(bundle.m * v) / d4;
}

/// Entanglement fidelity of two-step teleportation: (1/d^4) v^T M v with v = sqrt(f).
inline double two_step_fidelity(int N, int d, const ResourceWeights& w) {
    return two_step_fidelity(build_merit_matrix(N, d), w);
}

/// Success probability for an arbitrary resource profile, exact.
inline Rational p_succ_general(int N, int d, const ResourceWeights& w) {
    if (w.N != N || w.d != d)
        throw std::invalid_argument("p_succ_general: weights do not match (N, d)");
    Rational total = 0;
    for (const auto& lam : enum_partitions(N - 1, d)) {
        Rational fill = 0;
        for (Cell a : addable_cells(lam, d)) {
            const Partition la = add_cell(lam, a);
            fill += w.at(la) / Rational(dim_gl(la, d));
        }
        BigInt shrink = 0;
        for (Cell r : removable_cells(lam))
            shrink += dim_gl(remove_cell(lam, r), d);
        total += fill * Rational(shrink);
    }
    return total / Rational(BigInt(d) * d);
}

/// Closed form for the optimal profile: N(N-1) / ((N+d^2-1)(N+d^2-2)).
inline Rational p_succ_closed(int N, int d) {
    if (N < 2)
        throw std::invalid_argument("p_succ_closed: need N >= 2");
    const long long dd = static_cast<long long>(d) * d;
    return Rational(BigInt(N) * (N - 1), BigInt(N + dd - 1) * (N + dd - 2));
}

struct DeterministicOptimum {
    double fidelity = 0.0;
    ResourceWeights weights;
};

/// Best deterministic two-step fidelity: lambda_max(M)/d^4, weights from the
/// Perron eigenvector of M (entrywise nonnegative, squared and normalized).
inline DeterministicOptimum deterministic_two_step_optimum(int N, int d) {
    auto bundle = build_merit_matrix(N, d);
    auto eig = max_eig_psd(bundle.m);
    Eigen::VectorXd v = eig.vector;
    if (v.sum() < 0)
        v = -v;
    if (v.minCoeff() < -1e-10)
        throw std::runtime_error("deterministic_two_step_optimum: eigenvector not nonnegative");
    std::vector<Rational> f(bundle.mus.size());
    Rational sum = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double vi = std::max(v(static_cast<int>(i)), 0.0);
        f[i] = Rational(vi) * Rational(vi);
        sum += f[i];
    }
    for (auto& x : f)
        x /= sum;
    const double d4 = std::pow(double(d), 4.0);
    return {eig.value / d4, make_weights(N, d, std::move(f))};
}

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Adjacency step of Young's lattice: rows are partitions of n-1, columns
/// partitions of n (at most d rows); entry 1 when the column covers the row.
inline IntMatrix young_lattice_step(int n, int d) {
    auto rows = enum_partitions(n - 1, d);
    auto cols = enum_partitions(n, d);
    IntMatrix r = IntMatrix::Zero(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Cell a : addable_cells(rows[i], d))
            r(static_cast<int>(i),
              static_cast<int>(partition_index(cols, add_cell(rows[i], a)))) = 1;
    return r;
}

/// Teleportation matrix of the k-state multi-port scheme:
/// (R(N-k+1)...R(N))^T (R(N-k+1)...R(N)), a p(N,d) x p(N,d) integer matrix.
inline IntMatrix mpbt_matrix(int N, int d, int k) {
    if (k < 1 || k > N)
        throw std::invalid_argument("mpbt_matrix: need N >= k >= 1");
    IntMatrix prod = young_lattice_step(N, d);
    for (int j = 1; j < k; ++j)
        prod = (young_lattice_step(N - j, d) * prod).eval();
    return (prod.transpose() * prod).eval();
}

inline double mpbt_fidelity(int N, int d, int k) {
    IntMatrix m = mpbt_matrix(N, d, k);
    auto eig = max_eig_psd(m.cast<double>());
    return eig.value / std::pow(double(d), 2.0 * k);
}

/// Average fidelity from entanglement fidelity: (dim F + 1)/(dim + 1).
inline double avg_fidelity(double f_ent, int dim) {
    if (f_ent < -1e-12 || f_ent > 1.0 + 1e-12)
        throw std::invalid_argument("avg_fidelity: F outside [0, 1]");
    f_ent = std::clamp(f_ent, 0.0, 1.0);
    return (dim * f_ent + 1.0) / (dim + 1.0);
}

struct MeritReport {
    int N = 0;
    int d = 0;
    std::string resource;
    double f_ent = 0.0;
    double p_succ = 0.0;
    double cond_fidelity = 0.0; // f_ent / p_succ
    double f_avg = 0.0;         // average fidelity of the two-qudit message (dim d^2)
};

inline MeritReport merit_report(int N, int d, const ResourceWeights& w, std::string tag) {
    MeritReport r;
    r.N = N;
    r.d = d;
    r.resource = std::move(tag);
    r.f_ent = two_step_fidelity(N, d, w);
    r.p_succ = to_double(p_succ_general(N, d, w));
    r.cond_fidelity = r.f_ent / r.p_succ;
    r.f_avg = avg_fidelity(r.f_ent, d * d);
    return r;
}

} // namespace pbt

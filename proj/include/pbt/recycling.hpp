#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "pbt/dims.hpp"
#include "pbt/partitions.hpp"

namespace pbt {

/// gamma(lambda) = d + lambda_1; the largest of the per-cell values below.
inline int gamma_row(const Partition& lam, int d) {
    if (lam.rows() > d)
        throw std::invalid_argument("gamma_row: more than d rows");
    return d + lam.row(1);
}

/// gamma_a(lambda) = d + cont(a).
inline int gamma_cell(Cell a, int d) { return d + content(a); }

/// g(N) = 1 / binom(N + d^2 - 1, d^2 - 1).
inline Rational g_sequence(int N, int d) {
    if (N < 0)
        throw std::invalid_argument("g_sequence: need N >= 0");
    const int dd = d * d;
    return Rational(1, binomial(N + dd - 1, dd - 1));
}

/// c_mu = d^M g(M) m_mu / d_mu at level M = |mu|; the coefficient is level-local.
inline Rational resource_coefficient(const Partition& mu, int d) {
    const int M = mu.weight();
    BigInt dm = 1;
    for (int i = 0; i < M; ++i)
        dm *= d;
    return Rational(dm) * g_sequence(M, d) * Rational(dim_gl(mu, d), dim_sym(mu));
}

/// Conditional recycling fidelity after a successful round with the EPR resource.
inline double f_rec_succ_std(int N, int d) {
    if (N < 2 || d < 1)
        throw std::invalid_argument("f_rec_succ_std: need N >= 2, d >= 1");
    double num = 0.0;
    Rational den = 0;
    for (const auto& lam : enum_partitions(N - 1, d)) {
        const Rational md(dim_gl(lam, d) * dim_sym(lam));
        num += std::sqrt(1.0 / gamma_row(lam, d)) * to_double(md);
        den += md / gamma_row(lam, d);
    }
    BigInt dn = 1;
    for (int i = 0; i < N - 1; ++i)
        dn *= d;
    return num / std::sqrt(to_double(den)) / std::sqrt(to_double(dn));
}

/// Conditional recycling fidelity after a failed round with the EPR resource.
/// The failure branch is empty (nullopt) when its probability vanishes (d = 1).
inline std::optional<double> f_rec_fail_std(int N, int d) {
    if (N < 2 || d < 1)
        throw std::invalid_argument("f_rec_fail_std: need N >= 2, d >= 1");
    BigInt dn1 = 1;
    for (int i = 0; i < N + 1; ++i)
        dn1 *= d;
    Rational trace_weight = 0; // sum of g_{lambda,a} m_lambda d_{lambda+a}
    double sqrt_deficit = 0.0; // sum of (1 - sqrt(1 - g)) m_lambda d_{lambda+a}
    for (const auto& lam : enum_partitions(N - 1, d)) {
        const BigInt m_lam = dim_gl(lam, d);
        for (Cell a : addable_cells(lam, d)) {
            const Rational g(gamma_cell(a, d), gamma_row(lam, d));
            const BigInt md = m_lam * dim_sym(add_cell(lam, a));
            trace_weight += g * Rational(md);
            const double rem = to_double(Rational(1) - g);
            sqrt_deficit += (1.0 - std::sqrt(std::max(rem, 0.0))) * to_double(md);
        }
    }
    const Rational tr_pi0 = Rational(1) - trace_weight / Rational(dn1); // Tr(Pi_0) / d^{N+1}
    if (tr_pi0 == 0)
        return std::nullopt;
    const double num = 1.0 - sqrt_deficit / to_double(dn1);
    return num / std::sqrt(to_double(tr_pi0));
}

/// Conditional recycling fidelity after success with the optimized resource.
/// The first-round coefficients live at level N, the refreshed ones at level N-1.
inline double f_rec_succ_opt(int N, int d) {
    if (N < 2 || d < 1)
        throw std::invalid_argument("f_rec_succ_opt: need N >= 2, d >= 1");
    double num = 0.0;
    Rational norm = 0;
    const Rational gn = g_sequence(N, d);
    BigInt dn1 = 1;
    for (int i = 0; i < N + 1; ++i)
        dn1 *= d;
    for (const auto& lam : enum_partitions(N - 1, d)) {
        const BigInt d_lam = dim_sym(lam);
        const BigInt m_lam = dim_gl(lam, d);
        const Rational c_lam = resource_coefficient(lam, d);
        double cross = 0.0; // sum over a' of sqrt(m_{lam+a'} d_{lam+a'})
        BigInt dsum = 0;    // sum over a of d_{lam+a}
        for (Cell a : addable_cells(lam, d)) {
            const Partition la = add_cell(lam, a);
            cross += std::sqrt(to_double(Rational(dim_gl(la, d) * dim_sym(la))));
            dsum += dim_sym(la);
        }
        for (Cell a : addable_cells(lam, d)) {
            const Partition la = add_cell(lam, a);
            const Rational c_la = resource_coefficient(la, d);
            num += std::sqrt(to_double(c_lam * c_la)) * to_double(d_lam) * cross /
                   std::sqrt(to_double(dsum)) *
                   std::sqrt(to_double(Rational(dim_gl(la, d) * dim_sym(la)))) /
                   std::sqrt(double(N) * to_double(d_lam));
        }
        const Rational u = Rational(dn1) * gn * Rational(m_lam, BigInt(N) * d_lam);
        norm += u * Rational(d_lam * m_lam);
    }
    return num / std::sqrt(to_double(norm)) / std::sqrt(to_double(dn1));
}

/// Conditional recycling fidelity after failure with the optimized resource.
/// Sums c_mu m_{(mu,[1])} d_mu over partitions of N with at most d-1 rows.
inline std::optional<double> f_rec_fail_opt(int N, int d) {
    if (N < 1 || d < 1)
        throw std::invalid_argument("f_rec_fail_opt: need N >= 1, d >= 1");
    if (d == 1)
        return std::nullopt; // failure probability is zero
    Rational sum = 0;
    for (const auto& mu : enum_partitions(N, d - 1)) {
        const BigInt m_mixed = dim_gl(staircase_of(mu, Partition{1}, d));
        sum += resource_coefficient(mu, d) * Rational(m_mixed * dim_sym(mu));
    }
    BigInt dn1 = 1;
    for (int i = 0; i < N + 1; ++i)
        dn1 *= d;
    return std::sqrt(to_double(sum / Rational(dn1)));
}

enum class RecyclingScheme { standard, optimized };

struct RecyclingReport {
    int N = 0;
    int d = 0;
    RecyclingScheme scheme = RecyclingScheme::standard;
    double f_succ = 0.0;
    std::optional<double> f_fail; // nullopt when the failure branch is empty
};

inline RecyclingReport recycling_report(int N, int d, RecyclingScheme scheme) {
    RecyclingReport r;
    r.N = N;
    r.d = d;
    r.scheme = scheme;
    if (scheme == RecyclingScheme::standard) {
        r.f_succ = f_rec_succ_std(N, d);
        r.f_fail = f_rec_fail_std(N, d);
    } else {
        r.f_succ = f_rec_succ_opt(N, d);
        r.f_fail = f_rec_fail_opt(N, d);
    }
    return r;
}

} // namespace pbt

#include <catch2/catch_amalgamated.hpp>

#include "pbt/recycling.hpp"

using namespace pbt;
using Catch::Matchers::WithinAbs;

TEST_CASE("gamma values") {
    REQUIRE(gamma_row({2, 1}, 2) == 4);
    REQUIRE(gamma_row(Partition{}, 3) == 3);
    REQUIRE(gamma_cell({1, 3}, 2) == 4);
    // gamma_row is the maximum of gamma_cell over addable cells
    for (int n = 0; n <= 6; ++n)
        for (int d = 1; d <= 3; ++d)
            for (const auto& lam : enum_partitions(n, d)) {
                int best = 0;
                for (Cell a : addable_cells(lam, d))
                    best = std::max(best, gamma_cell(a, d));
                REQUIRE(best == gamma_row(lam, d));
            }
}

TEST_CASE("g_sequence") {
    REQUIRE(g_sequence(2, 2) == Rational(1, 10));
    REQUIRE(g_sequence(0, 3) == 1);
    REQUIRE(g_sequence(1, 2) == Rational(1, 4));
}

TEST_CASE("g_{lambda,a} lies in (0,1] and tops out at the first row") {
    for (int d = 2; d <= 3; ++d)
        for (int N = 2; N <= 8; ++N)
            for (const auto& lam : enum_partitions(N - 1, d))
                for (Cell a : addable_cells(lam, d)) {
                    Rational g(gamma_cell(a, d), gamma_row(lam, d));
                    REQUIRE(g > 0);
                    REQUIRE(g <= 1);
                    REQUIRE((g == 1) == (a.row == 1));
                }
}

TEST_CASE("recycling closed forms: frozen values") {
    REQUIRE_THAT(f_rec_succ_std(2, 2), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(f_rec_succ_std(3, 2), WithinAbs(0.99792679023551, 1e-11));
    REQUIRE_THAT(f_rec_fail_std(2, 2).value(), WithinAbs(0.86237243569579, 1e-11));
    REQUIRE_THAT(f_rec_fail_std(3, 2).value(), WithinAbs(0.82701716803867, 1e-11));
    REQUIRE_THAT(f_rec_succ_opt(2, 2), WithinAbs(0.96592582628907, 1e-11));
    REQUIRE_THAT(f_rec_succ_opt(3, 2), WithinAbs(0.94852813742386, 1e-11));
    // sqrt(0.6) by direct evaluation: c_(2) = 1.2, m_((2),[1]) = 4
    REQUIRE_THAT(f_rec_fail_opt(2, 2).value(), WithinAbs(std::sqrt(0.6), 1e-12));
    REQUIRE_THAT(f_rec_fail_opt(3, 2).value(), WithinAbs(1.0 / std::sqrt(2.0), 1e-12));
    REQUIRE_THAT(f_rec_fail_opt(2, 3).value(), WithinAbs(2.0 / std::sqrt(5.0), 1e-12));
}

TEST_CASE("one-dimensional ports: success certain, failure branch empty") {
    for (int N = 2; N <= 6; ++N) {
        REQUIRE_THAT(f_rec_succ_std(N, 1), WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(f_rec_succ_opt(N, 1), WithinAbs(1.0, 1e-12));
        REQUIRE_FALSE(f_rec_fail_std(N, 1).has_value());
        REQUIRE_FALSE(f_rec_fail_opt(N, 1).has_value());
    }
}

TEST_CASE("all recycling fidelities stay inside [0,1]") {
    for (int d = 2; d <= 3; ++d)
        for (int N = 2; N <= 14; ++N) {
            for (double v : {f_rec_succ_std(N, d), f_rec_succ_opt(N, d)}) {
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0 + 1e-12);
            }
            for (auto v : {f_rec_fail_std(N, d), f_rec_fail_opt(N, d)}) {
                REQUIRE(v.has_value());
                REQUIRE(*v >= 0.0);
                REQUIRE(*v <= 1.0 + 1e-12);
            }
        }
}

TEST_CASE("optimized failure fidelity does not approach 1 for large N") {
    for (int d = 2; d <= 3; ++d) {
        double prev = 2.0;
        for (int N = 2; N <= 12; ++N) {
            double v = f_rec_fail_opt(N, d).value();
            REQUIRE(v < prev + 1e-12);
            prev = v;
        }
        REQUIRE(prev < 0.7);
    }
}

TEST_CASE("recycling report") {
    auto r = recycling_report(3, 2, RecyclingScheme::optimized);
    REQUIRE_THAT(r.f_succ, WithinAbs(f_rec_succ_opt(3, 2), 1e-15));
    REQUIRE(r.f_fail.has_value());
    auto r1 = recycling_report(4, 1, RecyclingScheme::standard);
    REQUIRE_FALSE(r1.f_fail.has_value());
}

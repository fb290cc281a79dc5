#include <catch2/catch_amalgamated.hpp>

#include "pbt/merit.hpp"

using namespace pbt;
using Catch::Matchers::WithinAbs;

TEST_CASE("resource weights: optimal and EPR profiles") {
    auto w = optimal_ppbt_weights(2, 2);
    REQUIRE(w.at(Partition{2}) == Rational(9, 10));
    REQUIRE(w.at(Partition{1, 1}) == Rational(1, 10));

    for (int d = 1; d <= 3; ++d)
        for (int N = 1; N <= 8; ++N)
            for (const auto& rw : {optimal_ppbt_weights(N, d), epr_weights(N, d)}) {
                Rational sum = 0;
                for (const auto& x : rw.f)
                    sum += x;
                REQUIRE(sum == 1);
            }

    auto w1 = optimal_ppbt_weights(4, 1);
    REQUIRE(w1.f.size() == 1);
    REQUIRE(w1.f[0] == 1);

    REQUIRE_THROWS_AS(make_weights(2, 2, {Rational(2), Rational(-1)}), std::invalid_argument);
    REQUIRE_THROWS_AS(make_weights(2, 2, {Rational(1, 2), Rational(1, 3)}),
                      std::invalid_argument);
}

TEST_CASE("q_measure") {
    REQUIRE(q_measure({1, 2}, {1}, 2, 2) == Rational(1, 2));
    // single addable cell of a one-row diagram at d = 1
    REQUIRE(q_measure({1, 4}, {3}, 4, 1) == Rational(1, 4));
    // measure property at level N-1
    Rational sum = 0;
    for (Cell a : addable_cells({1}, 2))
        sum += q_measure(a, {1}, 2, 2);
    REQUIRE(sum == 1);
    REQUIRE_THROWS_AS(q_measure({3, 1}, {1}, 2, 2), std::invalid_argument);
}

TEST_CASE("h_block values and symmetry") {
    auto h = h_block(Partition{}, 2, 2);
    REQUIRE(h.rows() == 1);
    REQUIRE_THAT(h(0, 0), WithinAbs((std::sqrt(1.5) + std::sqrt(0.5)) / 2.0, 1e-14));
    REQUIRE_THAT(h(0, 0), WithinAbs(0.96592582628907, 1e-12));

    auto h1 = h_block(Partition{}, 2, 1);
    REQUIRE(h1.rows() == 1);
    REQUIRE_THAT(h1(0, 0), WithinAbs(std::sqrt(2.0) / 2.0, 1e-14));

    for (int N : {4, 5})
        for (const auto& nu : enum_partitions(N - 2, 3)) {
            auto hh = h_block(nu, N, 3);
            REQUIRE_THAT((hh - hh.transpose()).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-14));
        }
}

TEST_CASE("s_block values") {
    // row bound inactive: the normalizing sum is 1 and the entry is sqrt(1/q2)
    auto s = s_block(Partition{}, 2, 2);
    REQUIRE(s.rows() == 1);
    REQUIRE(s.cols() == 2);
    REQUIRE_THAT(s(0, 0), WithinAbs(1.0, 1e-14)); // q2((1,1)|empty) = 1 at N = 2
    REQUIRE_THAT(s(0, 1), WithinAbs(1.0, 1e-14));

    auto s1 = s_block(Partition{}, 2, 1);
    REQUIRE(s1.rows() == 1);
    REQUIRE(s1.cols() == 1);
    REQUIRE_THAT(s1(0, 0), WithinAbs(std::sqrt(2.0), 1e-14));

    // columns not reachable from nu stay zero
    auto s31 = s_block(Partition{1}, 3, 2); // nu = (1); mu = (3) reachable via (2), (1,1) via (2,1)...
    auto mus = enum_partitions(3, 2);
    for (int i = 0; i < s31.rows(); ++i)
        for (int j = 0; j < s31.cols(); ++j)
            REQUIRE(std::isfinite(s31(i, j)));
}

TEST_CASE("merit matrix bundle: shape and PSD structure") {
    for (auto [N, d] : std::vector<std::pair<int, int>>{{2, 2}, {4, 2}, {3, 3}, {5, 2}}) {
        auto bundle = build_merit_matrix(N, d);
        const auto& m = bundle.m;
        REQUIRE(m.rows() == static_cast<long>(enum_partitions(N, d).size()));
        REQUIRE_THAT((m - m.transpose()).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-12));
        REQUIRE(m.minCoeff() >= 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        REQUIRE(es.eigenvalues().minCoeff() >= -1e-10);
        // m equals the sum of X^T X blocks entrywise
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m.rows(), m.cols());
        for (const auto& x : bundle.x_blocks)
            sum += x.transpose() * x;
        REQUIRE_THAT((m - sum).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("fidelity: trivial one-dimensional case is exact") {
    for (int N = 2; N <= 6; ++N)
        REQUIRE_THAT(two_step_fidelity(N, 1, optimal_ppbt_weights(N, 1)),
                     WithinAbs(1.0, 1e-12));
}

TEST_CASE("fidelity: frozen dense-channel values") {
    REQUIRE_THAT(two_step_fidelity(2, 2, optimal_ppbt_weights(2, 2)),
                 WithinAbs(0.093301270189222, 1e-12));
    REQUIRE_THAT(two_step_fidelity(3, 2, optimal_ppbt_weights(3, 2)),
                 WithinAbs(0.191544011451988, 1e-12));
    REQUIRE_THAT(two_step_fidelity(4, 2, optimal_ppbt_weights(4, 2)),
                 WithinAbs(0.277306211386952, 1e-12));
    REQUIRE_THAT(two_step_fidelity(2, 3, optimal_ppbt_weights(2, 3)),
                 WithinAbs(0.021586767128690, 1e-12));
    REQUIRE_THAT(two_step_fidelity(2, 2, epr_weights(2, 2)),
                 WithinAbs(0.108814087736527, 1e-12));
    REQUIRE_THAT(two_step_fidelity(3, 2, epr_weights(3, 2)),
                 WithinAbs(0.269471500568128, 1e-12));
}

TEST_CASE("fidelity is independent of the nu summation order") {
    auto bundle = build_merit_matrix(6, 2);
    Eigen::MatrixXd reversed = Eigen::MatrixXd::Zero(bundle.m.rows(), bundle.m.cols());
    for (auto it = bundle.x_blocks.rbegin(); it != bundle.x_blocks.rend(); ++it)
        reversed += it->transpose() * *it;
    REQUIRE_THAT((bundle.m - reversed).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-13));
}

TEST_CASE("p_succ: general formula equals the closed form exactly") {
    for (int d = 1; d <= 3; ++d)
        for (int N = 2; N <= 12; ++N)
            REQUIRE(p_succ_general(N, d, optimal_ppbt_weights(N, d)) == p_succ_closed(N, d));
    REQUIRE(p_succ_closed(2, 2) == Rational(1, 10));
    REQUIRE(p_succ_closed(10, 2) == Rational(15, 26));
    REQUIRE(p_succ_closed(7, 1) == 1);
}

TEST_CASE("fidelity does not exceed the success probability") {
    for (int d = 2; d <= 3; ++d)
        for (int N = 2; N <= 9; ++N) {
            auto w = optimal_ppbt_weights(N, d);
            double f = two_step_fidelity(N, d, w);
            double p = to_double(p_succ_general(N, d, w));
            REQUIRE(f >= 0.0);
            REQUIRE(f <= p + 1e-12);
            REQUIRE(p <= 1.0 + 1e-15);
        }
}

TEST_CASE("deterministic optimum") {
    auto t = deterministic_two_step_optimum(2, 1);
    REQUIRE_THAT(t.fidelity, WithinAbs(1.0, 1e-12));
    REQUIRE(t.weights.f.size() == 1);

    auto t32 = deterministic_two_step_optimum(3, 2);
    REQUIRE(t32.fidelity >= two_step_fidelity(3, 2, optimal_ppbt_weights(3, 2)) - 1e-12);
    Rational sum = 0;
    for (const auto& x : t32.weights.f) {
        REQUIRE(x >= 0);
        sum += x;
    }
    REQUIRE(sum == 1);
    REQUIRE_THAT(t32.fidelity, WithinAbs(0.2997562100, 1e-9));

    REQUIRE(deterministic_two_step_optimum(6, 2).fidelity <= mpbt_fidelity(6, 2, 2) + 1e-12);
}

TEST_CASE("multi-port teleportation matrix") {
    auto r2 = young_lattice_step(2, 2);
    REQUIRE(r2.rows() == 1);
    REQUIRE(r2.cols() == 2);
    REQUIRE(r2(0, 0) == 1);
    REQUIRE(r2(0, 1) == 1);

    REQUIRE_THAT(mpbt_fidelity(2, 2, 2), WithinAbs(0.125, 1e-14));
    for (int N = 2; N <= 8; ++N)
        REQUIRE_THAT(mpbt_fidelity(N, 1, 2), WithinAbs(1.0, 1e-14));

    auto m = mpbt_matrix(4, 2, 2);
    REQUIRE(m.rows() == static_cast<long>(enum_partitions(4, 2).size()));
    REQUIRE((m - m.transpose()).cwiseAbs().maxCoeff() == 0);
    REQUIRE_THROWS_AS(mpbt_matrix(2, 2, 3), std::invalid_argument);
}

TEST_CASE("max_eig_psd") {
    REQUIRE_THAT(max_eig_psd(Eigen::MatrixXd::Identity(3, 3)).value, WithinAbs(1.0, 1e-12));

    Eigen::MatrixXd ones(2, 2);
    ones << 1, 1, 1, 1;
    auto r = max_eig_psd(ones);
    REQUIRE_THAT(r.value, WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(std::abs(r.vector(0)), WithinAbs(1.0 / std::sqrt(2.0), 1e-12));

    // random PSD 5x5 against the full decomposition
    Eigen::MatrixXd g = Eigen::MatrixXd::Random(5, 5);
    Eigen::MatrixXd a = g * g.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    REQUIRE_THAT(max_eig_psd(a).value, WithinAbs(es.eigenvalues().maxCoeff(), 1e-10));

    // power-iteration path
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(250, 250);
    for (int i = 0; i < 250; ++i)
        big(i, i) = 1.0 + i / 250.0;
    big(10, 20) = big(20, 10) = 0.3;
    auto rb = max_eig_psd(big);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(big);
    REQUIRE_THAT(rb.value, WithinAbs(esb.eigenvalues().maxCoeff(), 1e-9));

    Eigen::MatrixXd asym(2, 2);
    asym << 0, 1, 0, 0;
    REQUIRE_THROWS_AS(max_eig_psd(asym), std::invalid_argument);
}

TEST_CASE("avg_fidelity") {
    REQUIRE_THAT(avg_fidelity(1.0, 7), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(avg_fidelity(0.0, 4), WithinAbs(0.2, 1e-15));
    REQUIRE_THAT(avg_fidelity(0.5, 2), WithinAbs(2.0 / 3.0, 1e-15));
    REQUIRE_THROWS_AS(avg_fidelity(1.5, 2), std::invalid_argument);
}

TEST_CASE("merit report invariants") {
    auto r = merit_report(4, 2, optimal_ppbt_weights(4, 2), "optimized");
    REQUIRE(r.f_ent >= 0.0);
    REQUIRE(r.f_ent <= r.p_succ);
    REQUIRE(r.p_succ <= 1.0);
    REQUIRE_THAT(r.cond_fidelity, WithinAbs(r.f_ent / r.p_succ, 1e-15));
    REQUIRE_THAT(r.f_avg, WithinAbs((4 * r.f_ent + 1) / 5.0, 1e-15));
}

// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The mphy authors

#include "doctest.h"
#include "mphy/randomization.hpp"

#include <cmath>
#include <numbers>

using namespace mphy;

TEST_CASE("rank-one W* makes both randomizations exact")
{
    // M <= 3 random instances have rank-one optimal covariance
    for (int seed = 0; seed < 10; ++seed)
    {
        const auto cs = generate_channels(4, 1 + seed % 3, 40 + seed);
        const auto mc = solve_mc(cs);
        REQUIRE(mc.rank_r == 1);
        Rng rng(seed);
        const auto w = randomize_rank1(mc, cs, 5, rng);
        CHECK(w.worst_snr == doctest::Approx(mc.rho_min).epsilon(1e-8));
        CHECK(w.w.norm() == doctest::Approx(1.0).epsilon(1e-14));

        const auto b = randomize_rank2_alamouti(mc, cs, 5, rng);
        CHECK((b.b * b.b.adjoint() - mc.w_star.matrix()).norm() < 1e-8);
        CHECK(b.worst_snr == doctest::Approx(mc.rho_min).epsilon(1e-8));
    }
}

TEST_CASE("randomized designs are feasible, deterministic and dominated by W*")
{
    const auto cs = generate_channels(4, 16, 3);
    const auto mc = solve_mc(cs);
    Rng a(17), b(17);
    const auto w1 = randomize_rank1(mc, cs, 200, a);
    const auto w2 = randomize_rank1(mc, cs, 200, b);
    CHECK(w1.w == w2.w);
    CHECK(std::abs(w1.w.squaredNorm() - 1.0) <= 1e-12);

    const auto b1 = randomize_rank2_alamouti(mc, cs, 200, a);
    const auto b2 = randomize_rank2_alamouti(mc, cs, 200, b);
    CHECK(b1.b == b2.b);
    CHECK(std::abs(b1.covariance().trace() - 1.0) <= 1e-12);

    for (double p : {0.1, 1.0, 10.0})
    {
        const double cap = rate_from_covariance(mc.w_star, cs, p);
        CHECK(cap == doctest::Approx(capacity_rate(mc.rho_min, p)).epsilon(1e-12));
        CHECK(rate_from_covariance(HermitianMatrix::outer(w1.w), cs, p) <= cap + 1e-12);
        CHECK(rate_from_covariance(b1.covariance(), cs, p) <= cap + 1e-12);
    }
    CHECK(rate_from_covariance(mc.w_star, cs, 0.0) == 0.0);
    CHECK(worst_snr(HermitianMatrix::outer(w1.w), cs) == doctest::Approx(w1.worst_snr).epsilon(1e-12));
}

TEST_CASE("best-of-L is nondecreasing in L for nested streams")
{
    const auto cs = generate_channels(4, 24, 8);
    const auto mc = solve_mc(cs);
    double prev1 = 0.0, prev2 = 0.0;
    for (int l : {1, 2, 5, 20, 100, 500})
    {
        Rng r1(99), r2(99);
        const double s1 = randomize_rank1(mc, cs, l, r1).worst_snr;
        const double s2 = randomize_rank2_alamouti(mc, cs, l, r2).worst_snr;
        CHECK(s1 >= prev1);
        CHECK(s2 >= prev2);
        prev1 = s1;
        prev2 = s2;
    }
}

TEST_CASE("rank-one randomization is near optimal for M <= 3")
{
    for (int seed = 0; seed < 20; ++seed)
    {
        const auto cs = generate_channels(2 + seed % 4, 1 + seed % 3, 500 + seed);
        const auto mc = solve_mc(cs);
        Rng rng(seed);
        CHECK(randomize_rank1(mc, cs, 1000, rng).worst_snr >= 0.95 * mc.rho_min);
    }
}

TEST_CASE("rank-two designs beat rank-one designs on average")
{
    double sum1 = 0.0, sum2 = 0.0;
    for (int seed = 0; seed < 30; ++seed)
    {
        const auto cs = generate_channels(8, 32, 900 + seed);
        const auto mc = solve_mc(cs);
        Rng r1(seed), r2(seed);
        sum1 += rate_from_covariance(HermitianMatrix::outer(randomize_rank1(mc, cs, 0, r1).w), cs, 2.0);
        sum2 += rate_from_covariance(randomize_rank2_alamouti(mc, cs, 0, r2).covariance(), cs, 2.0);
    }
    CHECK(sum2 > sum1);
}

TEST_CASE("gap bounds")
{
    for (int m : {1, 4, 32})
    {
        CHECK(gap_bound_rank1(1.0, 1e12, m) == doctest::Approx(std::log(8.0 * m)).epsilon(1e-9));
        CHECK(gap_bound_rank2(1.0, 1e12, m) == doctest::Approx(std::log(12.22 * std::sqrt(m))).epsilon(1e-9));
        CHECK(gap_bound_rank1(0.0, 5.0, m) == 0.0);
        CHECK(gap_bound_rank2(0.0, 5.0, m) == 0.0);
    }
    // 8 M > 12.22 sqrt(M) exactly when M > (12.22 / 8)^2 = 2.333
    for (int m = 1; m <= 64; ++m)
        CHECK((gap_bound_rank2(0.7, 3.0, m) < gap_bound_rank1(0.7, 3.0, m)) == (m >= 3));
    CHECK(rank2_constant_derived() == doctest::Approx(12.2195).epsilon(1e-4));
    CHECK(std::abs(rank2_constant_derived() - rank2_constant) < 5e-3);
}

TEST_CASE("tail bound constants")
{
    CHECK(tail_alpha_star() == doctest::Approx(2.9017).epsilon(1e-4));
    CHECK(upper_tail_bound(tail_alpha_star()) == doctest::Approx(1.0 / 2.4).epsilon(1e-12));
    for (int m : {1, 8, 32})
        CHECK(lower_tail_bound(tail_beta_star(m)) <= 1.0 / (2.4 * m));
    CHECK(lower_tail_bound(1.0 - 1e-9) == doctest::Approx(1.0));
    CHECK_THROWS_AS(upper_tail_bound(1.0), std::domain_error);
}

TEST_CASE("tail bound audit on a random W*")
{
    const auto cs = generate_channels(6, 32, 12);
    const auto mc = solve_mc(cs);
    Rng rng(3);
    const auto reports = audit_tail_bounds(mc.w_star, cs.n_users, 20000, rng);
    REQUIRE(reports.size() == 5);
    for (const auto &r : reports)
    {
        CAPTURE(to_string(r.bound_kind));
        CAPTURE(r.parameter);
        CHECK(r.satisfied());
        CHECK(r.satisfaction_frequency >= 0.0);
        CHECK(r.satisfaction_frequency <= 1.0);
    }
}

TEST_CASE("randomization audit over a small ensemble")
{
    RandomizationAuditConfig config;
    config.instances = 20;
    config.n_antennas = 4;
    config.n_users = 12;
    const auto reports = audit_randomization(config);
    REQUIRE(reports.size() == 2);
    for (const auto &r : reports)
    {
        CHECK(r.satisfied());
        CHECK(r.ratios.size() == 20);
    }
}

// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The mphy authors

#include "doctest.h"
#include "mphy/capacity.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace mphy;

namespace
{
ChannelSet make_set(std::vector<ComplexVector> hs)
{
    ChannelSet cs;
    cs.n_antennas = static_cast<int>(hs.front().size());
    cs.n_users = static_cast<int>(hs.size());
    cs.channels = std::move(hs);
    return cs;
}

// lambda_max through Eigen's own solver, independent of eig_hermitian
double oracle_lambda_max(const ChannelSet &cs, const RealVector &q)
{
    ComplexMatrix s = ComplexMatrix::Zero(cs.n_antennas, cs.n_antennas);
    for (int i = 0; i < cs.n_users; ++i)
        s += q(i) * cs.channels[static_cast<std::size_t>(i)] * cs.channels[static_cast<std::size_t>(i)].adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s);
    return es.eigenvalues().maxCoeff();
}

void check_invariants(const McSolution &sol, const ChannelSet &cs, double tol)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sol.w_star.matrix());
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    CHECK(std::abs(sol.w_star.trace() - 1.0) <= 1e-9);
    CHECK(sol.dual_weights.minCoeff() >= 0.0);
    CHECK(std::abs(sol.dual_weights.sum() - 1.0) <= 1e-12);
    const RealVector rho = user_loadings(sol.w_star, cs);
    CHECK((rho - sol.rho).cwiseAbs().maxCoeff() <= 1e-12 * rho.maxCoeff());
    CHECK(sol.rho_min == rho.minCoeff());
    const double dual = oracle_lambda_max(cs, sol.dual_weights);
    CHECK(dual - sol.rho_min >= -1e-12 * dual); // weak duality
    CHECK(dual - sol.rho_min <= tol * sol.rho_min);
    CHECK(sol.duality_gap >= -1e-9);
}
} // namespace

TEST_CASE("solve_mc: single user")
{
    ComplexVector h = ComplexVector::Zero(2);
    h(0) = 1.0;
    const auto sol = solve_mc(make_set({h}));
    CHECK(sol.rho_min == doctest::Approx(1.0));
    CHECK(sol.duality_gap == 0.0);
    CHECK(sol.rank_r == 1);
    CHECK((sol.w_star.matrix() - h * h.adjoint()).norm() < 1e-15);
}

TEST_CASE("solve_mc: orthogonal users")
{
    ComplexVector e1 = ComplexVector::Zero(2), e2 = ComplexVector::Zero(2);
    e1(0) = 1.0;
    e2(1) = 1.0;
    const auto cs = make_set({e1, e2});
    const auto sol = solve_mc(cs);
    CHECK(std::abs(sol.rho_min - 0.5) <= 1e-8);
    CHECK(sol.rank_r == 2);
    CHECK((sol.w_star.matrix() - 0.5 * ComplexMatrix::Identity(2, 2)).norm() < 1e-7);
    CHECK(sol.dual_weights(0) == doctest::Approx(0.5).epsilon(1e-6));
    check_invariants(sol, cs, 1e-6);
}

TEST_CASE("solve_mc: random instances are certified")
{
    for (int trial = 0; trial < 40; ++trial)
    {
        const int n = 2 + trial % 7;
        const int m = 1 + (trial * 7) % 40;
        const auto cs = generate_channels(n, m, 1000 + trial);
        const auto sol = solve_mc(cs);
        CAPTURE(n);
        CAPTURE(m);
        check_invariants(sol, cs, 1e-6);
        CHECK(sol.rank_r >= 1);
        CHECK(sol.rank_r * sol.rank_r <= m); // rank bound for extreme points
    }
    const auto cs = generate_channels(4, 12, 42);
    const auto sol = solve_mc(cs);
    CHECK(sol.relative_gap() <= 1e-6);
}

TEST_CASE("solve_mc: grid search oracle for N = 2")
{
    // W = [[a, c e^{i phi}], [c e^{-i phi}, 1 - a]] with c^2 <= a (1 - a)
    for (std::uint64_t seed : {3u, 4u, 5u})
    {
        const auto cs = generate_channels(2, 2, seed);
        const auto sol = solve_mc(cs);
        double best = 0.0;
        const int na = 200, nc = 60, np = 120;
        for (int ia = 0; ia <= na; ++ia)
        {
            const double a = static_cast<double>(ia) / na;
            const double cmax = std::sqrt(a * (1 - a));
            for (int ic = 0; ic <= nc; ++ic)
                for (int ip = 0; ip < np; ++ip)
                {
                    const double c = cmax * ic / nc;
                    const cdouble off = std::polar(c, 2 * std::numbers::pi * ip / np);
                    ComplexMatrix w(2, 2);
                    w << a, off, std::conj(off), 1 - a;
                    best = std::max(best, worst_snr(HermitianMatrix(w), cs));
                }
        }
        CHECK(sol.rho_min >= best - 1e-12);
        CHECK(capacity_rate(sol.rho_min, 1.0) == doctest::Approx(capacity_rate(best, 1.0)).epsilon(1e-3));
    }
}

TEST_CASE("solve_mc: scale covariance and monotonicity")
{
    const auto cs = generate_channels(4, 10, 77);
    auto scaled = cs;
    for (auto &h : scaled.channels)
        h *= 3.0;
    const auto a = solve_mc(cs);
    const auto b = solve_mc(scaled);
    CHECK(b.rho_min == doctest::Approx(9.0 * a.rho_min).epsilon(1e-6));
    CHECK(worst_snr(b.w_star, cs) == doctest::Approx(a.rho_min).epsilon(1e-6));

    double prev = std::numeric_limits<double>::infinity();
    const auto big = generate_channels(4, 30, 78);
    for (int m = 1; m <= 30; m += 3)
    {
        auto sub = big;
        sub.channels.resize(static_cast<std::size_t>(m));
        sub.n_users = m;
        const double r = solve_mc(sub).rho_min;
        CHECK(r <= prev * (1 + 1e-6));
        prev = r;
    }
}

TEST_CASE("solve_mc: iteration budget exhaustion reports the best iterate")
{
    const auto cs = generate_channels(6, 30, 5);
    try
    {
        solve_mc(cs, 1e-6, 3);
        FAIL("expected convergence_error");
    }
    catch (const convergence_error &e)
    {
        CHECK(e.best.duality_gap > 0.0);
        CHECK(e.best.w_star.dim() == 6);
    }
    CHECK_THROWS_AS(solve_mc(cs, 0.0), invalid_input_error);
}

TEST_CASE("capacity and baseline rates")
{
    CHECK(capacity_rate(1.0, 0.0) == 0.0);
    CHECK(capacity_rate(0.5, 2.0) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(capacity_rate(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(capacity_rate(1.0, -1.0), std::domain_error);

    const auto single = generate_channels(1, 5, 1);
    const auto s1 = solve_mc(single);
    CHECK(open_loop_rate(single, 2.0) == doctest::Approx(capacity_rate(s1.rho_min, 2.0)).epsilon(1e-14));

    for (int seed = 0; seed < 20; ++seed)
    {
        const auto cs = generate_channels(4, 8, 300 + seed);
        const auto sol = solve_mc(cs);
        CHECK(open_loop_rate(cs, 3.0) <= capacity_rate(sol.rho_min, 3.0) + 1e-9);
    }
}

TEST_CASE("worst_snr")
{
    const auto cs = generate_channels(3, 6, 8);
    double min_norm = 1e300;
    for (const auto &h : cs.channels)
        min_norm = std::min(min_norm, h.squaredNorm());
    CHECK(worst_snr(HermitianMatrix(ComplexMatrix::Identity(3, 3) / 3.0), cs) ==
          doctest::Approx(min_norm / 3.0));

    Rng rng(1);
    const ComplexVector w = sample_standard_cn(rng, 3);
    double direct = 1e300;
    for (const auto &h : cs.channels)
        direct = std::min(direct, std::norm(h.dot(w)));
    CHECK(worst_snr(HermitianMatrix::outer(w), cs) == doctest::Approx(direct).epsilon(1e-12));

    const auto sol = solve_mc(cs);
    CHECK(worst_snr(sol.w_star, cs) == sol.rho_min);
}

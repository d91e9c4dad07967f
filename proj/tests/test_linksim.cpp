// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The mphy authors

#include "doctest.h"
#include "mphy/linksim.hpp"
#include "mphy/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

using namespace mphy;

TEST_CASE("fixed beamformer traces are constant")
{
    const auto cs = generate_channels(4, 6, 2);
    const auto mc = solve_mc(cs);
    Rng rng(1);
    const auto w = randomize_rank1(mc, cs, 50, rng);
    const auto tr = simulate_frame(SbfSampler::fixed_bf(w.w), cs, 2.0, 100, 9);
    for (int i = 0; i < cs.n_users; ++i)
    {
        CHECK(tr.snr.row(i).maxCoeff() == tr.snr.row(i).minCoeff());
        CHECK(tr.snr(i, 0) == doctest::Approx(2.0 * std::norm(cs.channels[i].dot(w.w))).epsilon(1e-13));
        CHECK(tr.rate_se(i) == 0.0);
    }
    CHECK_THROWS_AS(simulate_frame(SbfSampler::fixed_bf(w.w), cs, 2.0, 0, 9), invalid_input_error);
}

TEST_CASE("frame rates follow the closed forms and tighten with T")
{
    const auto cs = generate_channels(4, 8, 19);
    const auto mc = solve_mc(cs);
    REQUIRE(mc.rank_r >= 2);
    const double p = 2.0;
    for (SchemeKind k : {SchemeKind::GaussianSBF, SchemeKind::EllipticSBF, SchemeKind::BinghamSBF,
                         SchemeKind::GaussianSBFAlamouti, SchemeKind::EllipticSBFAlamouti,
                         SchemeKind::BinghamSBFAlamouti})
    {
        const auto s = SbfSampler::stochastic(k, mc);
        const RealVector truth = closed_form_user_rates(s, cs, p);
        const auto t144 = simulate_frame(s, cs, p, 144, 5);
        const auto t1440 = simulate_frame(s, cs, p, 1440, 5);
        const auto t14400 = simulate_frame(s, cs, p, 14400, 5);
        CAPTURE(to_string(k));
        int outside = 0;
        for (int i = 0; i < cs.n_users; ++i)
        {
            outside += std::abs(t1440.rate(i) - truth(i)) > 3.0 * t1440.rate_se(i) ? 1 : 0;
            outside += std::abs(t14400.rate(i) - truth(i)) > 3.0 * t14400.rate_se(i) ? 1 : 0;
            // standard error scales as 1/sqrt(T)
            CHECK(t144.rate_se(i) / t1440.rate_se(i) == doctest::Approx(std::sqrt(10.0)).epsilon(0.25));
            CHECK(t1440.rate_se(i) / t14400.rate_se(i) == doctest::Approx(std::sqrt(10.0)).epsilon(0.1));
        }
        CHECK(outside <= 1);
    }
}

TEST_CASE("Bingham traces have constant power, Gaussian power is a chi-square mixture")
{
    const auto cs = generate_channels(4, 8, 23);
    const auto mc = solve_mc(cs);
    const auto tb = simulate_frame(SchemeKind::BinghamSBF, mc, cs, 1.0, 1000, 3);
    CHECK((tb.power.array() - 1.0).abs().maxCoeff() <= 1e-12);
    const auto tba = simulate_frame(SchemeKind::BinghamSBFAlamouti, mc, cs, 1.0, 1000, 3);
    CHECK((tba.power.array() - 1.0).abs().maxCoeff() <= 1e-12);

    // |L^H alpha|^2 = sum lambda_k E_k; distinct lambdas give a hypoexponential law
    const RealVector lam = eig_hermitian(mc.w_star).eigenvalues.head(mc.rank_r);
    auto cdf = [&](double t) {
        double c = 1.0;
        for (int k = 0; k < lam.size(); ++k)
        {
            double w = 1.0;
            for (int j = 0; j < lam.size(); ++j)
                if (j != k)
                    w *= lam(k) / (lam(k) - lam(j));
            c -= w * std::exp(-t / lam(k));
        }
        return c;
    };
    const int n = 100000;
    auto tg = simulate_frame(SchemeKind::GaussianSBF, mc, cs, 1.0, n, 4);
    std::vector<double> pw(tg.power.data(), tg.power.data() + n);
    std::sort(pw.begin(), pw.end());
    double ks = 0.0;
    for (int k = 0; k < n; ++k)
        ks = std::max({ks, std::abs(cdf(pw[k]) - static_cast<double>(k) / n),
                       std::abs(cdf(pw[k]) - static_cast<double>(k + 1) / n)});
    CHECK(ks <= 0.02);
}

TEST_CASE("Alamouti effective SNR equals P h^H B B^H h")
{
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial)
    {
        ComplexMatrix b(4, 2);
        b.col(0) = sample_standard_cn(rng, 4);
        b.col(1) = sample_standard_cn(rng, 4);
        b /= b.norm();
        const ComplexVector h = sample_standard_cn(rng, 4);
        const double p = 0.5 + trial;
        const double target = p * (h.adjoint() * b).squaredNorm();
        CHECK(alamouti_effective_snr(b, h, p, 0, rng) == doctest::Approx(target).epsilon(1e-12));
        if (trial < 5)
            CHECK(alamouti_effective_snr(b, h, p, 100000, rng) == doctest::Approx(target).epsilon(0.02));

        // one zero column reduces to plain beamforming
        ComplexMatrix bw = ComplexMatrix::Zero(4, 2);
        bw.col(0) = b.col(0) / b.col(0).norm();
        CHECK(alamouti_effective_snr(bw, h, p, 0, rng) ==
              doctest::Approx(p * std::norm(h.dot(bw.col(0)))).epsilon(1e-12));
    }
}

TEST_CASE("uncoded QPSK BER")
{
    const auto cs = generate_channels(4, 6, 31);
    const auto mc = solve_mc(cs);
    Rng rng(1);
    const auto fixed = SbfSampler::fixed_bf(randomize_rank1(mc, cs, 100, rng).w);

    // pure noise
    const auto r0 = uncoded_ber(fixed, cs, 0.0, 10, 1000, 7);
    CHECK(r0.bits == 20000);
    for (int i = 0; i < cs.n_users; ++i)
        CHECK(std::abs(r0.ber(i) - 0.5) <= 3.0 * std::sqrt(0.25 / r0.bits));

    // waterfall: rho_min P = 40 dB
    const double p_hi = 1e4 / mc.rho_min;
    CHECK(uncoded_ber(fixed, cs, p_hi, 10, 1000, 7).worst_user_ber <= 1e-4);

    // semi-analytic oracle E[Q(sqrt SNR)] per bit
    for (SchemeKind k : {SchemeKind::FixedBF, SchemeKind::GaussianSBF, SchemeKind::EllipticSBFAlamouti})
    {
        const SbfSampler s = k == SchemeKind::FixedBF ? fixed : SbfSampler::stochastic(k, mc);
        const auto res = uncoded_ber(s, cs, 4.0, 40, 1440, 11);
        CAPTURE(to_string(k));
        for (int i = 0; i < cs.n_users; ++i)
        {
            const double q = res.expected_ber(i);
            CHECK(std::abs(res.ber(i) - q) <= 3.0 * std::sqrt(q * (1 - q) / res.bits) + 1e-12);
        }
        if (k == SchemeKind::FixedBF)
        {
            const double snr = 4.0 * std::norm(cs.channels[res.worst_user].dot(fixed.design.col(0)));
            CHECK(res.expected_ber(res.worst_user) == doctest::Approx(q_function(std::sqrt(snr))).epsilon(1e-12));
        }
    }

    // BER nonincreasing in P
    const auto gs = SbfSampler::stochastic(SchemeKind::GaussianSBF, mc);
    double prev = 1.0;
    for (double pdb = -5.0; pdb <= 15.0; pdb += 2.5)
    {
        const auto res = uncoded_ber(gs, cs, std::pow(10.0, pdb / 10.0), 20, 1440, 13);
        CHECK(res.worst_user_ber <= prev + 3.0 * res.sigma());
        prev = res.worst_user_ber;
    }
}

TEST_CASE("BER does not depend on the worker count")
{
    const auto cs = generate_channels(4, 5, 41);
    const auto mc = solve_mc(cs);
    const auto s = SbfSampler::stochastic(SchemeKind::BinghamSBFAlamouti, mc);
    setenv("MPHY_THREADS", "1", 1);
    const auto a = uncoded_ber(s, cs, 2.0, 12, 301, 5);
    setenv("MPHY_THREADS", "5", 1);
    const auto b = uncoded_ber(s, cs, 2.0, 12, 301, 5);
    unsetenv("MPHY_THREADS");
    CHECK(a.ber == b.ber);
    CHECK(a.expected_ber == b.expected_ber);
    CHECK(a.bits == 2 * 301 * 12);
}

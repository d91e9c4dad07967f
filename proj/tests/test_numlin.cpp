// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The mphy authors

#include "doctest.h"
#include "mphy/numlin.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace mphy;

namespace
{
HermitianMatrix random_hermitian(Rng &rng, int n)
{
    ComplexMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = rng.standard_cn();
    return HermitianMatrix(0.5 * (a + a.adjoint()));
}

double e1_quadrature(double x)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([x](double t) { return std::exp(-x * t) / t; }, 1.0,
                                std::numeric_limits<double>::infinity());
}
} // namespace

TEST_CASE("eig_hermitian: identity and diagonal")
{
    auto id = eig_hermitian(HermitianMatrix::identity(3));
    CHECK(id.eigenvalues.isApprox(RealVector::Ones(3)));
    CHECK((id.eigenvectors.adjoint() * id.eigenvectors - ComplexMatrix::Identity(3, 3)).norm() < 1e-14);

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    auto sd = eig_hermitian(HermitianMatrix(d));
    CHECK(sd.eigenvalues(0) == doctest::Approx(3.0));
    CHECK(sd.eigenvalues(1) == doctest::Approx(1.0));
    CHECK(std::abs(sd.eigenvectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(sd.eigenvectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian: reconstruction and unitarity over random matrices")
{
    Rng rng(11);
    double worst_rec = 0.0, worst_unit = 0.0, worst_vs_eigen = 0.0;
    for (int trial = 0; trial < 1000; ++trial)
    {
        const int n = 1 + trial % 16;
        const HermitianMatrix a = random_hermitian(rng, n);
        const auto sd = eig_hermitian(a);
        const ComplexMatrix rec =
            sd.eigenvectors * sd.eigenvalues.cast<cdouble>().asDiagonal() * sd.eigenvectors.adjoint();
        worst_rec = std::max(worst_rec, (rec - a.matrix()).norm() / std::max(1.0, a.matrix().norm()));
        worst_unit = std::max(worst_unit,
                              (sd.eigenvectors.adjoint() * sd.eigenvectors - ComplexMatrix::Identity(n, n)).norm());
        for (int k = 1; k < n; ++k)
            REQUIRE(sd.eigenvalues(k - 1) >= sd.eigenvalues(k));

        // independent oracle: Eigen's tridiagonal QR solver (ascending order)
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> ref(a.matrix());
        RealVector expect = ref.eigenvalues().reverse();
        worst_vs_eigen = std::max(worst_vs_eigen, (expect - sd.eigenvalues).cwiseAbs().maxCoeff());
    }
    CHECK(worst_rec <= 1e-10);
    CHECK(worst_unit <= 1e-10);
    CHECK(worst_vs_eigen <= 1e-10);
}

TEST_CASE("eig_hermitian rejects non-finite input")
{
    ComplexMatrix a = ComplexMatrix::Identity(2, 2);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(HermitianMatrix{a}, invalid_input_error);
}

TEST_CASE("sqrt_factor: scaled identity, rank one, random PSD")
{
    auto f = sqrt_factor(HermitianMatrix(0.5 * ComplexMatrix::Identity(2, 2)));
    CHECK(f.rank == 2);
    CHECK((f.l.adjoint() * f.l - 0.5 * ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

    Rng rng(5);
    const ComplexVector w = sample_standard_cn(rng, 4);
    auto f1 = sqrt_factor(HermitianMatrix::outer(w));
    CHECK(f1.rank == 1);
    CHECK(f1.l.rows() == 1);
    CHECK((f1.l.adjoint() * f1.l - w * w.adjoint()).norm() < 1e-12 * w.squaredNorm());

    for (int trial = 0; trial < 50; ++trial)
    {
        ComplexMatrix g(3, 6);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 6; ++j)
                g(i, j) = rng.standard_cn();
        const HermitianMatrix w3(g.adjoint() * g);
        auto fw = sqrt_factor(w3);
        CHECK(fw.rank == 3);
        CHECK((fw.l.adjoint() * fw.l - w3.matrix()).norm() <= 1e-8 * std::max(1.0, w3.matrix().norm()));

        // same nonzero spectrum
        const auto s1 = eig_hermitian(w3);
        const auto s2 = eig_hermitian(HermitianMatrix(fw.l.adjoint() * fw.l));
        CHECK((s1.eigenvalues.head(3) - s2.eigenvalues.head(3)).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("sqrt_factor rejects indefinite matrices")
{
    ComplexMatrix a = ComplexMatrix::Identity(2, 2);
    a(1, 1) = -0.1;
    CHECK_THROWS_AS(sqrt_factor(HermitianMatrix(a)), not_psd_error);
}

TEST_CASE("exp_integral_e1 against quadrature and series identity")
{
    CHECK(exp_integral_e1(1.0) == doctest::Approx(0.21938393439552).epsilon(1e-12));
    for (double x : {1e-3, 0.05, 0.3, 0.9, 1.0, 1.1, 2.5, 7.0, 20.0, 60.0})
        CHECK(exp_integral_e1(x) == doctest::Approx(e1_quadrature(x)).epsilon(1e-10));

    // E1(x) + log x + gamma -> 0
    double prev = 1.0;
    for (double x : {1e-1, 1e-2, 1e-4, 1e-6, 1e-8})
    {
        const double v = std::abs(exp_integral_e1(x) + std::log(x) + euler_gamma);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-7);

    // monotone decay to 0
    double last = exp_integral_e1(0.5);
    for (double x = 1.0; x < 700.0; x *= 1.7)
    {
        const double v = exp_integral_e1(x);
        CHECK(v < last);
        last = v;
    }
    CHECK(exp_integral_e1(std::numeric_limits<double>::infinity()) == 0.0);
    CHECK_THROWS_AS(exp_integral_e1(0.0), std::domain_error);
    CHECK_THROWS_AS(exp_integral_e1(-1.0), std::domain_error);
}

TEST_CASE("exp_integral_e1 derivative is -exp(-x)/x")
{
    for (double x = 0.1; x <= 10.0; x += 0.1)
    {
        const double h = 1e-5 * x;
        const double fd = (exp_integral_e1(x + h) - exp_integral_e1(x - h)) / (2 * h);
        CHECK(std::abs(fd + std::exp(-x) / x) < 1e-6);
    }
}

TEST_CASE("exp_integral_e1_scaled is consistent")
{
    for (double x : {0.2, 1.0, 3.0, 30.0})
        CHECK(exp_integral_e1_scaled(x) == doctest::Approx(std::exp(x) * exp_integral_e1(x)).epsilon(1e-12));
    // large x: e^x E1(x) ~ 1/x (1 - 1/x + 2/x^2)
    const double x = 1e6;
    CHECK(exp_integral_e1_scaled(x) == doctest::Approx((1.0 - 1.0 / x + 2.0 / (x * x)) / x).epsilon(1e-12));
}

TEST_CASE("harmonic numbers")
{
    CHECK(harmonic(0) == 0.0);
    CHECK(harmonic(3) == doctest::Approx(11.0 / 6.0));
    CHECK(euler_gamma == doctest::Approx(0.577215664901).epsilon(1e-12));
    // H_{n-1} - log n climbs towards gamma from below, H_n - log n falls towards it
    double below = harmonic(1) - std::log(2.0);
    double above = harmonic(2) - std::log(2.0);
    for (int n = 3; n <= 10000; ++n)
    {
        const double lo = harmonic(n - 1) - std::log(static_cast<double>(n));
        const double hi = harmonic(n) - std::log(static_cast<double>(n));
        REQUIRE(lo > below);
        REQUIRE(hi < above);
        REQUIRE(lo < euler_gamma);
        REQUIRE(hi > euler_gamma);
        below = lo;
        above = hi;
    }
    CHECK(std::abs(below - euler_gamma) < 1e-4);
}

TEST_CASE("binomial and q_function")
{
    CHECK(binomial(5, 2) == 10.0);
    CHECK(binomial(10, 0) == 1.0);
    CHECK(binomial(3, 4) == 0.0);
    CHECK(binomial(40, 20) == 137846528820.0);
    CHECK(q_function(0.0) == doctest::Approx(0.5));
    CHECK(q_function(1.0) == doctest::Approx(0.158655253931457).epsilon(1e-12));
}

TEST_CASE("standard CN sampling moments and determinism")
{
    Rng rng(2024);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i)
        sum += std::norm(rng.standard_cn());
    CHECK(std::abs(sum / n - 1.0) < 0.01);

    Rng a(9), b(9);
    CHECK(sample_standard_cn(a, 5) == sample_standard_cn(b, 5));

    Rng c(77);
    ComplexMatrix cov = ComplexMatrix::Zero(4, 4);
    RealVector re_var = RealVector::Zero(4);
    const int s = 100000;
    for (int i = 0; i < s; ++i)
    {
        const ComplexVector v = sample_standard_cn(c, 4);
        cov += v * v.adjoint();
        re_var += v.real().cwiseAbs2();
    }
    cov /= s;
    CHECK((cov - ComplexMatrix::Identity(4, 4)).norm() < 0.02);
    CHECK((re_var / s - RealVector::Constant(4, 0.5)).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("rng substreams are distinct and reproducible")
{
    auto a = Rng::stream(1, {2, 3});
    auto b = Rng::stream(1, {2, 3});
    auto c = Rng::stream(1, {3, 2});
    auto d = Rng::stream(2, {2, 3});
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
    Rng u(1);
    for (int i = 0; i < 1000; ++i)
    {
        const double x = u.uniform_open();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
    }
}

TEST_CASE("quadrature helpers")
{
    CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0).epsilon(1e-13));
    CHECK(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

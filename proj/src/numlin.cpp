// SPDX-License-Identifier: Apache-2.0
//
// mphy - physical-layer multicast transceiver designs and rate audits
// Copyright (C) 2026 The mphy authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mphy/numlin.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

namespace mphy
{

// ---------- Hermitian storage ----------

HermitianMatrix::HermitianMatrix(const ComplexMatrix &a, double hermitian_tol)
{
    if (a.rows() != a.cols() || a.rows() == 0)
        throw invalid_input_error("HermitianMatrix: input must be square and non-empty.");
    if (!a.allFinite())
        throw invalid_input_error("HermitianMatrix: non-finite entries.");
    const double skew = (a - a.adjoint()).norm();
    if (skew > hermitian_tol * std::max(1.0, a.norm()))
        throw invalid_input_error("HermitianMatrix: input is not Hermitian.");
    a_ = 0.5 * (a + a.adjoint());
    for (Eigen::Index i = 0; i < a_.rows(); ++i)
        a_(i, i) = a_(i, i).real();
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index n)
{
    return HermitianMatrix(ComplexMatrix::Identity(n, n));
}

HermitianMatrix HermitianMatrix::outer(const ComplexVector &v)
{
    return HermitianMatrix(v * v.adjoint());
}

double HermitianMatrix::quadratic_form(const ComplexVector &x) const
{
    return x.dot(a_ * x).real();
}

HermitianMatrix HermitianMatrix::scaled(double s) const
{
    HermitianMatrix out;
    out.a_ = s * a_;
    return out;
}

// ---------- Jacobi eigensolver ----------

SpectralDecomposition eig_hermitian(const HermitianMatrix &a)
{
    const Eigen::Index n = a.dim();
    if (n == 0)
        throw invalid_input_error("eig_hermitian: empty matrix.");
    if (!a.matrix().allFinite())
        throw invalid_input_error("eig_hermitian: non-finite entries.");

    ComplexMatrix m = a.matrix();
    ComplexMatrix v = ComplexMatrix::Identity(n, n);
    const double scale = m.norm();

    auto off_norm_sq = [&]() {
        double s = 0.0;
        for (Eigen::Index q = 1; q < n; ++q)
            for (Eigen::Index p = 0; p < q; ++p)
                s += std::norm(m(p, q));
        return s;
    };

    const double stop = std::pow(1e-15 * scale, 2);
    for (int sweep = 0; sweep < 100 && scale > 0.0; ++sweep)
    {
        if (off_norm_sq() <= stop)
            break;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
            {
                const cdouble apq = m(p, q);
                const double mag = std::abs(apq);
                if (mag <= std::numeric_limits<double>::min())
                    continue;

                // Remove the phase of a_pq, then apply a real rotation to the 2x2 block.
                const cdouble phase_conj = std::conj(apq) / mag;
                const double tau = (m(q, q).real() - m(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const cdouble vpp = c, vpq = s, vqp = -s * phase_conj, vqq = c * phase_conj;

                for (Eigen::Index k = 0; k < n; ++k)
                {
                    const cdouble mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = mkp * vpp + mkq * vqp;
                    m(k, q) = mkp * vpq + mkq * vqq;
                }
                for (Eigen::Index k = 0; k < n; ++k)
                {
                    const cdouble mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = std::conj(vpp) * mpk + std::conj(vqp) * mqk;
                    m(q, k) = std::conj(vpq) * mpk + std::conj(vqq) * mqk;
                }
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                m(p, p) = m(p, p).real();
                m(q, q) = m(q, q).real();

                for (Eigen::Index k = 0; k < n; ++k)
                {
                    const cdouble vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * vpp + vkq * vqp;
                    v(k, q) = vkp * vpq + vkq * vqq;
                }
            }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return m(i, i).real() > m(j, j).real(); });

    SpectralDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        out.eigenvalues(k) = m(order[k], order[k]).real();
        out.eigenvectors.col(k) = v.col(order[k]);
    }
    return out;
}

SquareRootFactor sqrt_factor(const HermitianMatrix &w, double rel_tol)
{
    if (!(rel_tol > 0.0))
        throw invalid_input_error("sqrt_factor: tolerance must be positive.");
    const SpectralDecomposition sd = eig_hermitian(w);
    const double lmax = sd.lambda_max();
    if (!(lmax > 0.0))
        throw invalid_input_error("sqrt_factor: matrix has no positive eigenvalue.");

    const double neg_floor = -rel_tol * std::max(w.trace(), lmax);
    if (sd.lambda_min() < neg_floor)
        throw not_psd_error("sqrt_factor: matrix is not positive semidefinite.", sd.lambda_min());

    int r = 0;
    while (r < sd.eigenvalues.size() && sd.eigenvalues(r) > rel_tol * lmax)
        ++r;

    SquareRootFactor f;
    f.rank = r;
    f.source_tol = rel_tol;
    f.l.resize(r, w.dim());
    for (int k = 0; k < r; ++k)
        f.l.row(k) = std::sqrt(sd.eigenvalues(k)) * sd.eigenvectors.col(k).adjoint();
    return f;
}

// ---------- special functions ----------

namespace
{
// Power series: E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
double e1_series(double x)
{
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k)
    {
        term *= -x / k;
        const double add = term / k;
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum))
            break;
    }
    return -euler_gamma - std::log(x) - sum;
}

// Modified Lentz continued fraction for exp(x) E1(x), x >= 1
double e1_scaled_cf(double x)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i)
    {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            break;
    }
    return h;
}
} // namespace

double exp_integral_e1(double x)
{
    if (!(x > 0.0) || !std::isfinite(x))
    {
        if (x == std::numeric_limits<double>::infinity())
            return 0.0;
        throw std::domain_error("exp_integral_e1: argument must be positive.");
    }
    if (x <= 1.0)
        return e1_series(x);
    return std::exp(-x) * e1_scaled_cf(x);
}

double exp_integral_e1_scaled(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("exp_integral_e1_scaled: argument must be positive.");
    if (x <= 1.0)
        return std::exp(x) * e1_series(x);
    return e1_scaled_cf(x);
}

double harmonic(int n)
{
    double s = 0.0;
    for (int k = n; k >= 1; --k) // small terms first
        s += 1.0 / k;
    return s;
}

double binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    k = std::min(k, n - k);
    double out = 1.0;
    for (int i = 1; i <= k; ++i)
        out = out * (n - k + i) / i;
    return out < 9e15 ? std::round(out) : out;
}

double q_function(double x)
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double integrate(const std::function<double(double)> &f, double a, double b, double rel_tol)
{
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol);
}

double integrate_to_infinity(const std::function<double(double)> &f, double a, double rel_tol)
{
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, a, std::numeric_limits<double>::infinity(), 20, rel_tol);
}

// ---------- random streams ----------

std::uint64_t splitmix64(std::uint64_t &state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids)
{
    std::uint64_t state = master;
    std::uint64_t key = splitmix64(state);
    for (std::uint64_t id : ids)
    {
        state = key ^ (id * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL);
        key = splitmix64(state);
    }
    return key;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::stream(std::uint64_t master, std::initializer_list<std::uint64_t> ids)
{
    return Rng(mix_seed(master, ids));
}

std::uint64_t Rng::next_u64()
{
    return engine_();
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open()
{
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

cdouble Rng::standard_cn()
{
    // |z|^2 ~ Exp(1), uniform phase
    const double radius = std::sqrt(-std::log(uniform_open()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

ComplexVector sample_standard_cn(Rng &rng, Eigen::Index dim)
{
    ComplexVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = rng.standard_cn();
    return v;
}

} // namespace mphy

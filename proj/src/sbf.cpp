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

#include "mphy/sbf.hpp"
#include "mphy/parallel.hpp"
#include "mphy/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace mphy
{

// ---------------------------------------------------------------------------
// Scheme tags
// ---------------------------------------------------------------------------

std::string to_string(SchemeKind kind)
{
    switch (kind)
    {
    case SchemeKind::FixedBF:
        return "fixed-bf";
    case SchemeKind::FixedAlamouti:
        return "fixed-alamouti";
    case SchemeKind::GaussianSBF:
        return "gaussian-sbf";
    case SchemeKind::EllipticSBF:
        return "elliptic-sbf";
    case SchemeKind::BinghamSBF:
        return "bingham-sbf";
    case SchemeKind::GaussianSBFAlamouti:
        return "gaussian-sbf-alamouti";
    case SchemeKind::EllipticSBFAlamouti:
        return "elliptic-sbf-alamouti";
    case SchemeKind::BinghamSBFAlamouti:
        return "bingham-sbf-alamouti";
    }
    return "unknown";
}

SchemeKind parse_scheme(const std::string &name)
{
    for (SchemeKind k : all_schemes)
        if (to_string(k) == name)
            return k;
    throw invalid_input_error("unknown scheme '" + name + "'");
}

bool is_alamouti(SchemeKind kind)
{
    return kind == SchemeKind::FixedAlamouti || kind == SchemeKind::GaussianSBFAlamouti ||
           kind == SchemeKind::EllipticSBFAlamouti || kind == SchemeKind::BinghamSBFAlamouti;
}

bool is_fixed(SchemeKind kind)
{
    return kind == SchemeKind::FixedBF || kind == SchemeKind::FixedAlamouti;
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

SbfSampler SbfSampler::stochastic(SchemeKind kind, const SquareRootFactor &factor)
{
    if (is_fixed(kind))
        throw invalid_input_error("SbfSampler::stochastic: fixed schemes need a design.");
    if (factor.rank < 1)
        throw invalid_input_error("SbfSampler::stochastic: empty square-root factor.");
    SbfSampler s;
    s.kind = kind;
    s.factor = factor;
    return s;
}

SbfSampler SbfSampler::stochastic(SchemeKind kind, const McSolution &mc)
{
    return stochastic(kind, sqrt_factor(mc.w_star));
}

SbfSampler SbfSampler::fixed_bf(const ComplexVector &w)
{
    if (w.size() < 1 || !w.allFinite())
        throw invalid_input_error("SbfSampler::fixed_bf: invalid beamformer.");
    SbfSampler s;
    s.kind = SchemeKind::FixedBF;
    s.design = w;
    return s;
}

SbfSampler SbfSampler::fixed_alamouti(const ComplexMatrix &b)
{
    if (b.cols() != 2 || b.rows() < 1 || !b.allFinite())
        throw invalid_input_error("SbfSampler::fixed_alamouti: B must be N x 2.");
    SbfSampler s;
    s.kind = SchemeKind::FixedAlamouti;
    s.design = b;
    return s;
}

Eigen::Index SbfSampler::n_antennas() const
{
    return is_fixed(kind) ? design.rows() : factor.l.cols();
}

ComplexMatrix sample_beamformer(const SbfSampler &s, Rng &rng, int *redraws)
{
    if (is_fixed(s.kind))
        return s.design;

    const auto &l = s.factor.l;
    const int r = s.factor.rank;
    const int cols = s.columns();
    ComplexMatrix b(l.cols(), cols);
    for (;;)
    {
        ComplexMatrix alpha(r, cols);
        for (int c = 0; c < cols; ++c)
            alpha.col(c) = sample_standard_cn(rng, r);
        b = l.adjoint() * alpha;
        if (cols == 2)
            b /= std::sqrt(2.0); // blkdiag(L, L) / sqrt 2

        switch (s.kind)
        {
        case SchemeKind::EllipticSBF:
        case SchemeKind::EllipticSBFAlamouti: {
            const double a = alpha.norm();
            if (a > 0.0)
            {
                b *= std::sqrt(static_cast<double>(r * cols)) / a;
                return b;
            }
            break;
        }
        case SchemeKind::BinghamSBF:
        case SchemeKind::BinghamSBFAlamouti: {
            const double n = b.norm();
            if (n > 0.0)
            {
                b /= n;
                return b;
            }
            break;
        }
        default:
            return b;
        }
        if (redraws)
            ++*redraws;
    }
}

// ---------------------------------------------------------------------------
// xi / eta distributions
// ---------------------------------------------------------------------------

double eta_cdf(double t, double u_norm_sq, int l, int r)
{
    if (l < 1 || r < 1 || !(u_norm_sq > 0.0) || std::isnan(t))
        throw std::domain_error("eta_cdf: need l >= 1, r >= 1, |u|^2 > 0.");
    if (t <= 0.0)
        return 0.0;
    if (t >= u_norm_sq)
        return 1.0;
    if (r == 1)
        return 0.0; // eta = |u|^2 almost surely

    const int n = l * r - 1;
    const double x = (u_norm_sq - t) / u_norm_sq;
    const double y = t / u_norm_sq;
    double tail = 0.0;
    for (int j = l * (r - 1); j <= n; ++j)
        tail += binomial(n, j) * std::pow(x, j) * std::pow(y, n - j);
    return std::clamp(1.0 - tail, 0.0, 1.0);
}

std::variant<double, PointMass> xi_pdf(double t, int r, bool alamouti)
{
    if (r < 1 || std::isnan(t))
        throw std::domain_error("xi_pdf: r must be positive.");
    if (r == 1)
        return PointMass{1.0};
    const double rr = r;
    if (t < 0.0 || t > rr)
        return 0.0;
    const double s = 1.0 - t / rr;
    if (!alamouti)
        return (1.0 - 1.0 / rr) * std::pow(s, r - 2);
    return (2.0 * rr - 1.0) * (2.0 * rr - 2.0) / rr * (t / rr) * std::pow(s, 2 * r - 3);
}

// ---------------------------------------------------------------------------
// Closed-form rates
// ---------------------------------------------------------------------------

namespace
{

void check_rate_args(double rho, double p)
{
    if (!(rho >= 0.0) || !(p >= 0.0) || !std::isfinite(rho) || !std::isfinite(p))
        throw std::domain_error("rate: rho and P must be finite and nonnegative.");
}

// Terms kept when the sum and its absolute version agree to this factor; beyond it the
// alternating sum has lost too many digits.
constexpr double cancellation_limit = 1e4;

// (1 + 1/a)^n [log(1+a) - H_n - sum_{k=1}^n C(n,k) (-1)^k / (k (1+a)^k)], with the
// magnitude of everything that was summed.
struct Bracket
{
    double value = 0.0;
    double magnitude = 0.0;
};

Bracket binomial_bracket(double a, int n)
{
    const double log1pa = std::log1p(a);
    double sum = log1pa - harmonic(n);
    double mag = std::abs(log1pa) + harmonic(n);
    const double inv = 1.0 / (1.0 + a);
    double pw = 1.0;
    for (int k = 1; k <= n; ++k)
    {
        pw *= inv;
        const double term = binomial(n, k) * pw / k;
        sum -= (k % 2 == 0) ? term : -term;
        mag += term;
    }
    const double pref = std::pow(1.0 + 1.0 / a, n);
    return {pref * sum, pref * mag};
}

// E log(1 + x xi) with xi distributed per xi_pdf on [0, r]
double elliptic_quadrature(double x, int r, bool alamouti)
{
    return integrate([&](double t) { return std::log1p(x * t) * std::get<double>(xi_pdf(t, r, alamouti)); }, 0.0,
                     static_cast<double>(r));
}

} // namespace

double rate_gaussian_sbf(double rho, double p)
{
    check_rate_args(rho, p);
    const double x = rho * p;
    if (x == 0.0)
        return 0.0;
    return exp_integral_e1_scaled(1.0 / x);
}

double rate_gaussian_sbf_alam(double rho, double p)
{
    check_rate_args(rho, p);
    const double x = rho * p;
    if (x == 0.0)
        return 0.0;
    const double y = 2.0 / x;
    // (1 - y) e^y E1(y) + 1 cancels to O(1/y); integrate the Gamma(2, 1/2) density instead
    if (y > 1e3)
        return integrate_to_infinity([x](double t) { return std::log1p(x * t) * 4.0 * t * std::exp(-2.0 * t); }, 0.0);
    return (1.0 - y) * exp_integral_e1_scaled(y) + 1.0;
}

double rate_elliptic_sbf(double rho, double p, int r)
{
    check_rate_args(rho, p);
    if (r < 1)
        throw std::domain_error("rate_elliptic_sbf: r must be positive.");
    const double x = rho * p;
    if (x == 0.0)
        return 0.0;
    if (r == 1)
        return std::log1p(x);

    const double a = r * x;
    const Bracket b = binomial_bracket(a, r - 1);
    if (std::isfinite(b.magnitude) && b.magnitude <= cancellation_limit * std::abs(b.value))
        return b.value;
    return elliptic_quadrature(x, r, false);
}

double rate_elliptic_sbf_alam(double rho, double p, int r)
{
    check_rate_args(rho, p);
    if (r < 1)
        throw std::domain_error("rate_elliptic_sbf_alam: r must be positive.");
    const double x = rho * p;
    if (x == 0.0)
        return 0.0;
    if (r == 1)
        return std::log1p(x);

    const double a = r * x;
    const Bracket b1 = binomial_bracket(a, 2 * r - 2);
    const Bracket b2 = binomial_bracket(a, 2 * r - 1);
    const double c1 = 2.0 * r - 1.0, c2 = 2.0 * r - 2.0;
    const double value = c1 * b1.value - c2 * b2.value;
    const double mag = c1 * b1.magnitude + c2 * b2.magnitude;
    if (std::isfinite(mag) && mag <= cancellation_limit * std::abs(value))
        return value;
    return elliptic_quadrature(x, r, true);
}

// ---------------------------------------------------------------------------
// phi
// ---------------------------------------------------------------------------

namespace
{

struct Cluster
{
    double value;
    int multiplicity;
};

// positive entries scaled by s so that they sum to 1; returns log s^-1 offset
std::vector<double> positive_normalized(const RealVector &d, double &log_scale)
{
    if (d.size() == 0 || !d.allFinite())
        throw std::domain_error("phi: d must be finite and nonempty.");
    const double dmax = d.maxCoeff();
    if (!(dmax > 0.0))
        throw std::domain_error("phi: d needs a positive entry.");
    if (d.minCoeff() < -1e-12 * dmax)
        throw std::domain_error("phi: d must be nonnegative.");
    std::vector<double> v;
    double sum = 0.0;
    for (double x : d)
        if (x > 0.0)
        {
            v.push_back(x);
            sum += x;
        }
    for (double &x : v)
        x /= sum;
    log_scale = std::log(sum);
    return v;
}

std::vector<Cluster> cluster_values(std::vector<double> v)
{
    std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<Cluster> out;
    std::size_t i = 0;
    while (i < v.size())
    {
        std::size_t j = i + 1;
        double sum = v[i];
        while (j < v.size() && v[i] - v[j] <= 1e-6 * v[i])
            sum += v[j++];
        out.push_back({sum / static_cast<double>(j - i), static_cast<int>(j - i)});
        i = j;
    }
    return out;
}

// Truncated power series product of prod_j y_j^{r_j} (1 - x_j z)^{-r_j} up to z^{deg};
// the coefficient of z^{m-1} is the sum over Omega_{k,m} with the d_k^{1-m} factor absorbed.
std::vector<double> omega_series(const std::vector<Cluster> &c, std::size_t k, int deg, bool absolute)
{
    std::vector<double> poly(static_cast<std::size_t>(deg) + 1, 0.0);
    poly[0] = 1.0;
    const double dk = c[k].value;
    for (std::size_t j = 0; j < c.size(); ++j)
    {
        if (j == k)
            continue;
        const double dj = c[j].value;
        double x = dj / (dk - dj);
        double y = dk / (dk - dj);
        if (absolute)
        {
            x = std::abs(x);
            y = std::abs(y);
        }
        const int rj = c[j].multiplicity;
        // coefficients C(i + r_j - 1, i) x^i
        std::vector<double> f(poly.size());
        double xi = 1.0;
        for (std::size_t i = 0; i < f.size(); ++i)
        {
            f[i] = binomial(static_cast<int>(i) + rj - 1, static_cast<int>(i)) * xi;
            xi *= x;
        }
        std::vector<double> next(poly.size(), 0.0);
        for (std::size_t a = 0; a < poly.size(); ++a)
            for (std::size_t b = 0; a + b < poly.size(); ++b)
                next[a + b] += poly[a] * f[b];
        const double yr = std::pow(y, rj);
        for (double &coef : next)
            coef *= yr;
        poly = std::move(next);
    }
    return poly;
}

// Sum over clusters k and m = 1..r_k of
//   (-1)^{m-1} (H_{r_k-m} + log d_k - gamma) [z^{m-1}] prod_{j != k} (d_k / (d_k - d_j))^{r_j}
//                                              (1 - z d_j / (d_k - d_j))^{-r_j}.
// This is the Psi/theta expansion with d~_n^{-r_n} and d~_k^{r_k - m + 1} distributed
// into the per-j factors, so that no power of a small eigenvalue is formed.
bool phi_closed(const std::vector<Cluster> &c, double &result)
{
    double total = 0.0, largest = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
    {
        const int rk = c[k].multiplicity;
        const auto series = omega_series(c, k, rk - 1, false);
        const auto bound = omega_series(c, k, rk - 1, true);
        const double logd = std::log(c[k].value);
        for (int m = 1; m <= rk; ++m)
        {
            const double lead = harmonic(rk - m) + logd - euler_gamma;
            const double sign = (m % 2 == 1) ? 1.0 : -1.0;
            total += sign * lead * series[static_cast<std::size_t>(m - 1)];
            largest = std::max(largest, std::abs(lead) * bound[static_cast<std::size_t>(m - 1)]);
        }
    }
    result = total;
    return std::isfinite(total) && std::isfinite(largest) && largest <= 1e8 * std::max(std::abs(total), 1.0);
}

double phi_integral(const std::vector<double> &v)
{
    // E log X = int_0^inf (e^{-s} - E e^{-sX}) / s ds, E e^{-sX} = prod (1 + s d_k)^{-1}
    auto f = [&](double s) {
        if (s == 0.0)
            return 0.0;
        double acc = 0.0;
        for (double d : v)
            acc += std::log1p(s * d);
        // e^{-s} - e^{-acc} = -e^{-s} expm1(s - acc), kept for the small-s cancellation
        if (std::abs(s - acc) < 1.0)
            return -std::exp(-s) * std::expm1(s - acc) / s;
        return (std::exp(-s) - std::exp(-acc)) / s;
    };
    return integrate(f, 0.0, 1.0) + integrate_to_infinity(f, 1.0);
}

} // namespace

double phi_quadrature(const RealVector &d)
{
    double log_scale = 0.0;
    const auto v = positive_normalized(d, log_scale);
    return log_scale + phi_integral(v);
}

double phi_exponential_mix(const RealVector &d)
{
    double log_scale = 0.0;
    const auto v = positive_normalized(d, log_scale);
    const auto clusters = cluster_values(v);
    double value = 0.0;
    if (phi_closed(clusters, value))
        return log_scale + value;
    return log_scale + phi_integral(v);
}

double phi_bar(const RealVector &d)
{
    RealVector twice(2 * d.size());
    twice << 0.5 * d, 0.5 * d;
    return phi_exponential_mix(twice);
}

// ---------------------------------------------------------------------------
// Bingham rates
// ---------------------------------------------------------------------------

double rate_bingham(const SquareRootFactor &factor, const ComplexVector &h, double p, bool alamouti)
{
    if (!(p >= 0.0) || !std::isfinite(p))
        throw std::domain_error("rate_bingham: P must be finite and nonnegative.");
    if (h.size() != factor.l.cols())
        throw invalid_input_error("rate_bingham: channel dimension does not match L.");
    const ComplexVector lh = factor.l * h;
    const double rho = lh.squaredNorm();
    if (p == 0.0 || rho == 0.0)
        return 0.0;
    if (factor.rank == 1)
        return std::log1p(rho * p);

    const ComplexMatrix llh = factor.l * factor.l.adjoint();
    const RealVector lambda = eig_hermitian(HermitianMatrix(llh)).eigenvalues;
    const RealVector mu = eig_hermitian(HermitianMatrix(llh + p * lh * lh.adjoint())).eigenvalues;
    const RealVector mu_n = mu / mu.sum();
    auto phi = alamouti ? phi_bar : phi_exponential_mix;
    return std::log1p(rho * p) + phi(mu_n) - phi(lambda);
}

double rate_bingham(const McSolution &mc, const ComplexVector &h, double p, bool alamouti)
{
    return rate_bingham(sqrt_factor(mc.w_star), h, p, alamouti);
}

RealVector closed_form_user_rates(const SbfSampler &s, const ChannelSet &channels, double p)
{
    channels.validate();
    if (s.n_antennas() != channels.n_antennas)
        throw invalid_input_error("closed_form_user_rates: antenna count mismatch.");
    RealVector out(channels.n_users);
    const int r = s.factor.rank;
    for (int i = 0; i < channels.n_users; ++i)
    {
        const ComplexVector &h = channels.channels[static_cast<std::size_t>(i)];
        if (is_fixed(s.kind))
        {
            out(i) = std::log1p(p * (h.adjoint() * s.design).squaredNorm());
            continue;
        }
        const double rho = (s.factor.l * h).squaredNorm();
        switch (s.kind)
        {
        case SchemeKind::GaussianSBF:
            out(i) = rate_gaussian_sbf(rho, p);
            break;
        case SchemeKind::EllipticSBF:
            out(i) = rate_elliptic_sbf(rho, p, r);
            break;
        case SchemeKind::GaussianSBFAlamouti:
            out(i) = rate_gaussian_sbf_alam(rho, p);
            break;
        case SchemeKind::EllipticSBFAlamouti:
            out(i) = rate_elliptic_sbf_alam(rho, p, r);
            break;
        case SchemeKind::BinghamSBF:
            out(i) = rate_bingham(s.factor, h, p, false);
            break;
        case SchemeKind::BinghamSBFAlamouti:
            out(i) = rate_bingham(s.factor, h, p, true);
            break;
        default:
            break;
        }
    }
    return out;
}

double closed_form_rate(const SbfSampler &s, const ChannelSet &channels, double p)
{
    return closed_form_user_rates(s, channels, p).minCoeff();
}

// ---------------------------------------------------------------------------
// Gap constants
// ---------------------------------------------------------------------------

GapBound gap_bound(SchemeKind scheme, int r, int m)
{
    if (r < 1)
        throw std::domain_error("gap_bound: r must be positive.");
    GapBound g;
    g.scheme = scheme;
    g.r = r;
    const double lr = std::log(static_cast<double>(r));
    switch (scheme)
    {
    case SchemeKind::GaussianSBF:
        g.bound_nats = euler_gamma;
        break;
    case SchemeKind::EllipticSBF:
    case SchemeKind::BinghamSBF:
        g.bound_nats = harmonic(r - 1) - lr;
        break;
    case SchemeKind::GaussianSBFAlamouti:
        g.bound_nats = std::numbers::ln2 + euler_gamma - 1.0;
        break;
    case SchemeKind::EllipticSBFAlamouti:
    case SchemeKind::BinghamSBFAlamouti:
        g.bound_nats = harmonic(2 * r - 1) - lr - 1.0;
        break;
    case SchemeKind::FixedBF:
        g.m_dependent = true;
        g.bound_nats = m > 0 ? std::log(rank1_bound_factor(m)) : std::numeric_limits<double>::infinity();
        break;
    case SchemeKind::FixedAlamouti:
        g.m_dependent = true;
        g.bound_nats = m > 0 ? std::log(rank2_bound_factor(m)) : std::numeric_limits<double>::infinity();
        break;
    }
    // H_{r-1} - log r is 0 at r = 1 but can round to -tiny
    g.bound_nats = std::max(0.0, g.bound_nats);
    g.bound_bits = g.bound_nats / std::numbers::ln2;
    return g;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

namespace
{
constexpr int mc_block = 1024;
}

RateEstimate mc_rate_estimate(const SbfSampler &s, const ChannelSet &channels, double p, int samples, Rng &rng)
{
    channels.validate();
    if (samples < 1)
        throw invalid_input_error("mc_rate_estimate: samples must be positive.");
    if (!(p >= 0.0))
        throw std::domain_error("mc_rate_estimate: P must be nonnegative.");
    if (s.n_antennas() != channels.n_antennas)
        throw invalid_input_error("mc_rate_estimate: antenna count mismatch.");

    const ComplexMatrix h = channels.as_matrix();
    const int m = channels.n_users;
    const std::uint64_t key = rng.next_u64();
    const std::size_t blocks = (static_cast<std::size_t>(samples) + mc_block - 1) / mc_block;

    // Sums are taken around a reference draw so a deterministic scheme gives exactly zero variance.
    RealVector shift(m);
    {
        Rng r = Rng::stream(key, {std::numeric_limits<std::uint64_t>::max()});
        const RealVector g = (h.adjoint() * sample_beamformer(s, r)).rowwise().squaredNorm();
        for (int i = 0; i < m; ++i)
            shift(i) = std::log1p(p * g(i));
    }

    std::vector<RealVector> sum(blocks, RealVector::Zero(m)), sum_sq(blocks, RealVector::Zero(m));
    parallel_for(blocks, [&](std::size_t b) {
        Rng r = Rng::stream(key, {b});
        const std::size_t first = b * mc_block;
        const std::size_t last = std::min<std::size_t>(first + mc_block, static_cast<std::size_t>(samples));
        for (std::size_t k = first; k < last; ++k)
        {
            const ComplexMatrix w = sample_beamformer(s, r);
            const RealVector g = (h.adjoint() * w).rowwise().squaredNorm();
            for (int i = 0; i < m; ++i)
            {
                const double v = std::log1p(p * g(i)) - shift(i);
                sum[b](i) += v;
                sum_sq[b](i) += v * v;
            }
        }
    });

    RealVector total = RealVector::Zero(m), total_sq = RealVector::Zero(m);
    for (std::size_t b = 0; b < blocks; ++b)
    {
        total += sum[b];
        total_sq += sum_sq[b];
    }

    RateEstimate est;
    est.samples = samples;
    const RealVector centered = total / samples;
    est.mean = shift + centered;
    est.half_width = RealVector::Zero(m);
    if (samples > 1)
        for (int i = 0; i < m; ++i)
        {
            const double var =
                std::max(0.0, (total_sq(i) - samples * centered(i) * centered(i)) / (samples - 1));
            est.half_width(i) = 1.96 * std::sqrt(var / samples);
        }
    Eigen::Index arg = 0;
    est.multicast = est.mean.minCoeff(&arg);
    est.argmin_user = static_cast<int>(arg);
    return est;
}

PowerSpread power_spread(const SbfSampler &s, int samples, Rng &rng)
{
    if (samples < 1)
        throw invalid_input_error("power_spread: samples must be positive.");
    PowerSpread out;
    out.min = std::numeric_limits<double>::infinity();
    out.max = 0.0;
    double sum = 0.0;
    for (int k = 0; k < samples; ++k)
    {
        const double pw = sample_beamformer(s, rng).squaredNorm();
        out.min = std::min(out.min, pw);
        out.max = std::max(out.max, pw);
        sum += pw;
    }
    out.mean = sum / samples;
    return out;
}

} // namespace mphy

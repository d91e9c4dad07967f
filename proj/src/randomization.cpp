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

#include "mphy/randomization.hpp"
#include "mphy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mphy
{

namespace
{

// CN(0, W*) draw through the square-root factor: xi = L^H alpha
ComplexVector draw_xi(const SquareRootFactor &f, Rng &rng)
{
    return f.l.adjoint() * sample_standard_cn(rng, f.rank);
}

double min_abs2(const ComplexMatrix &h, const ComplexVector &w)
{
    return (h.adjoint() * w).cwiseAbs2().minCoeff();
}

double min_row_norm2(const ComplexMatrix &h, const ComplexMatrix &b)
{
    return (h.adjoint() * b).rowwise().squaredNorm().minCoeff();
}

ComplexVector rank1_candidate(const SquareRootFactor &f, std::uint64_t key, std::size_t j)
{
    Rng rng = Rng::stream(key, {j});
    ComplexVector xi = draw_xi(f, rng);
    for (int redraw = 0; xi.norm() == 0.0 && redraw < 100; ++redraw)
        xi = draw_xi(f, rng);
    return xi / xi.norm();
}

ComplexMatrix rank2_candidate(const SquareRootFactor &f, std::uint64_t key, std::size_t j)
{
    Rng rng = Rng::stream(key, {j});
    ComplexMatrix b(f.dim(), 2);
    b.col(0) = draw_xi(f, rng);
    b.col(1) = draw_xi(f, rng);
    b /= std::sqrt(2.0);
    return b / std::sqrt(b.squaredNorm()); // Tr(B B^H) = squared Frobenius norm
}

// Lowest index wins ties so the choice does not depend on evaluation order.
std::size_t argmax_first(const std::vector<double> &v)
{
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (v[j] > v[best])
            best = j;
    return best;
}

void check_inputs(const McSolution &mc, const ChannelSet &channels, int num_rand)
{
    channels.validate();
    if (num_rand < 0)
        throw invalid_input_error("randomization: num_rand must be positive.");
    if (mc.w_star.dim() != channels.n_antennas)
        throw invalid_input_error("randomization: W* dimension does not match the channels.");
}

} // namespace

int default_num_rand(const ChannelSet &channels)
{
    return 30 * channels.n_users * channels.n_antennas;
}

BeamformerRank1 randomize_rank1(const McSolution &mc, const ChannelSet &channels, int num_rand, Rng &rng)
{
    check_inputs(mc, channels, num_rand);
    if (num_rand == 0)
        num_rand = default_num_rand(channels);

    const SquareRootFactor f = sqrt_factor(mc.w_star);
    const ComplexMatrix h = channels.as_matrix();
    const std::uint64_t key = rng.next_u64();

    std::vector<double> snr(static_cast<std::size_t>(num_rand));
    parallel_for(snr.size(), [&](std::size_t j) { snr[j] = min_abs2(h, rank1_candidate(f, key, j)); });

    const std::size_t best = argmax_first(snr);
    BeamformerRank1 out;
    out.w = rank1_candidate(f, key, best);
    out.worst_snr = snr[best];
    out.candidate = static_cast<int>(best);
    return out;
}

BeamformerRank2 randomize_rank2_alamouti(const McSolution &mc, const ChannelSet &channels, int num_rand, Rng &rng)
{
    check_inputs(mc, channels, num_rand);
    if (num_rand == 0)
        num_rand = default_num_rand(channels);

    const SquareRootFactor f = sqrt_factor(mc.w_star);
    const ComplexMatrix h = channels.as_matrix();
    const std::uint64_t key = rng.next_u64();

    std::vector<double> snr(static_cast<std::size_t>(num_rand));
    parallel_for(snr.size(), [&](std::size_t j) { snr[j] = min_row_norm2(h, rank2_candidate(f, key, j)); });

    const std::size_t best = argmax_first(snr);
    BeamformerRank2 out;
    out.b = rank2_candidate(f, key, best);
    out.worst_snr = snr[best];
    out.candidate = static_cast<int>(best);
    return out;
}

double rate_from_covariance(const HermitianMatrix &w, const ChannelSet &channels, double p)
{
    if (p < 0.0)
        throw std::domain_error("rate_from_covariance: P must be nonnegative.");
    return std::log1p(p * std::max(0.0, worst_snr(w, channels)));
}

double rank2_bound_factor(int m)
{
    return rank2_constant * std::sqrt(static_cast<double>(m));
}

namespace
{
double gap_bound(double rho_min, double p, double factor)
{
    if (rho_min < 0.0 || p < 0.0)
        throw std::domain_error("gap bound: rho_min and P must be nonnegative.");
    const double x = rho_min * p;
    return std::log1p(x) - std::log1p(x / factor);
}
} // namespace

double gap_bound_rank1(double rho_min, double p, int m)
{
    if (m < 1)
        throw std::domain_error("gap_bound_rank1: M must be positive.");
    return gap_bound(rho_min, p, rank1_bound_factor(m));
}

double gap_bound_rank2(double rho_min, double p, int m)
{
    if (m < 1)
        throw std::domain_error("gap_bound_rank2: M must be positive.");
    return gap_bound(rho_min, p, rank2_bound_factor(m));
}

double tail_alpha_star()
{
    return 2.0 * std::log(2.4) - 4.0 * std::log(0.75);
}

double tail_beta_star(int m)
{
    return 1.0 / (std::numbers::e * std::sqrt(2.4 * m));
}

double rank2_constant_derived()
{
    return tail_alpha_star() * std::numbers::e * std::sqrt(2.4);
}

double lower_tail_bound(double beta)
{
    if (!(beta > 0.0) || beta > 1.0)
        throw std::domain_error("lower_tail_bound: beta must lie in (0, 1].");
    return std::min(1.0, std::exp(2.0 * (1.0 - beta + std::log(beta))));
}

double upper_tail_bound(double alpha)
{
    if (alpha < 4.0 / 3.0)
        throw std::domain_error("upper_tail_bound: alpha must be at least 4/3.");
    return std::min(1.0, std::exp(-0.5 * (alpha + 4.0 * std::log(0.75))));
}

std::string to_string(BoundKind kind)
{
    switch (kind)
    {
    case BoundKind::Rank1Snr:
        return "rank1-snr";
    case BoundKind::Rank2Snr:
        return "rank2-snr";
    case BoundKind::LowerTail:
        return "lower-tail";
    case BoundKind::UpperTail:
        return "upper-tail";
    }
    return "unknown";
}

double BoundAuditReport::sigma() const
{
    if (instances <= 0)
        return 0.0;
    const double p = std::clamp(required_frequency, 0.0, 1.0);
    return std::sqrt(p * (1.0 - p) / instances);
}

bool BoundAuditReport::satisfied() const
{
    if (upper_limit)
        return satisfaction_frequency <= required_frequency + 3.0 * sigma();
    return satisfaction_frequency >= required_frequency - 3.0 * sigma();
}

std::vector<BoundAuditReport> audit_randomization(const RandomizationAuditConfig &config)
{
    if (config.instances < 1)
        throw invalid_input_error("audit_randomization: instances must be positive.");
    const int m = config.n_users;
    const int num_rand = config.num_rand > 0 ? config.num_rand : 30 * m * config.n_antennas;

    std::vector<double> ratio1(static_cast<std::size_t>(config.instances));
    std::vector<double> ratio2(ratio1.size());
    for (std::size_t k = 0; k < ratio1.size(); ++k)
    {
        const ChannelSet cs = generate_channels(config.n_antennas, m, mix_seed(config.seed, {k}));
        const McSolution mc = solve_mc(cs);
        Rng rng1 = Rng::stream(config.seed, {k, 1});
        Rng rng2 = Rng::stream(config.seed, {k, 2});
        ratio1[k] = randomize_rank1(mc, cs, num_rand, rng1).worst_snr / mc.rho_min;
        ratio2[k] = randomize_rank2_alamouti(mc, cs, num_rand, rng2).worst_snr / mc.rho_min;
    }

    const double required = 1.0 - std::pow(5.0 / 6.0, num_rand);
    auto make = [&](BoundKind kind, std::vector<double> ratios, double factor) {
        BoundAuditReport rep;
        rep.bound_kind = kind;
        rep.parameter = num_rand;
        rep.instances = config.instances;
        rep.required_frequency = required;
        int hits = 0;
        for (double r : ratios)
            hits += r >= 1.0 / factor ? 1 : 0;
        rep.satisfaction_frequency = static_cast<double>(hits) / config.instances;
        rep.ratios = std::move(ratios);
        return rep;
    };
    return {make(BoundKind::Rank1Snr, std::move(ratio1), rank1_bound_factor(m)),
            make(BoundKind::Rank2Snr, std::move(ratio2), rank2_bound_factor(m))};
}

std::vector<BoundAuditReport> audit_tail_bounds(const HermitianMatrix &w_star, int m, int trials, Rng &rng)
{
    if (trials < 1 || m < 1)
        throw invalid_input_error("audit_tail_bounds: trials and M must be positive.");
    const SquareRootFactor f = sqrt_factor(w_star);
    const ComplexVector mu = sample_standard_cn(rng, w_star.dim());
    const double target_mu = w_star.quadratic_form(mu);
    const double target_tr = w_star.trace();
    const std::uint64_t key = rng.next_u64();

    // per trial: Tr(W~ mu mu^H) / Tr(W* mu mu^H) and Tr(W~) / Tr(W*)
    std::vector<double> ratio_mu(static_cast<std::size_t>(trials)), ratio_tr(ratio_mu.size());
    parallel_for(ratio_mu.size(), [&](std::size_t j) {
        Rng r = Rng::stream(key, {j});
        ComplexMatrix b(f.dim(), 2);
        b.col(0) = draw_xi(f, r);
        b.col(1) = draw_xi(f, r);
        b /= std::sqrt(2.0);
        ratio_mu[j] = (mu.adjoint() * b).squaredNorm() / target_mu;
        ratio_tr[j] = b.squaredNorm() / target_tr;
    });

    std::vector<BoundAuditReport> out;
    for (double beta : {0.1, 0.5, tail_beta_star(m)})
    {
        BoundAuditReport rep;
        rep.bound_kind = BoundKind::LowerTail;
        rep.parameter = beta;
        rep.instances = trials;
        rep.upper_limit = true;
        rep.required_frequency = lower_tail_bound(beta);
        int hits = 0;
        for (double v : ratio_mu)
            hits += v <= beta ? 1 : 0;
        rep.satisfaction_frequency = static_cast<double>(hits) / trials;
        out.push_back(rep);
    }
    for (double alpha : {4.0 / 3.0, tail_alpha_star()})
    {
        BoundAuditReport rep;
        rep.bound_kind = BoundKind::UpperTail;
        rep.parameter = alpha;
        rep.instances = trials;
        rep.upper_limit = true;
        rep.required_frequency = upper_tail_bound(alpha);
        int hits = 0;
        for (double v : ratio_tr)
            hits += v >= alpha ? 1 : 0;
        rep.satisfaction_frequency = static_cast<double>(hits) / trials;
        out.push_back(rep);
    }
    return out;
}

} // namespace mphy

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

#include "mphy/linksim.hpp"
#include "mphy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mphy
{

namespace
{

// Beamformer draws of one frame, one per symbol or per Alamouti block.
struct FrameDraws
{
    std::vector<ComplexMatrix> gains; // per draw: M x c matrix h_i^H B (c = 1 or 2)
    std::vector<double> power;
    int symbols_per_draw = 1;
};

void check_link_args(const SbfSampler &s, const ChannelSet &channels, double p, int t_len)
{
    channels.validate();
    if (t_len < 1)
        throw invalid_input_error("linksim: frame length must be positive.");
    if (!(p >= 0.0) || !std::isfinite(p))
        throw std::domain_error("linksim: P must be finite and nonnegative.");
    if (s.n_antennas() != channels.n_antennas)
        throw invalid_input_error("linksim: antenna count mismatch.");
}

FrameDraws draw_frame(const SbfSampler &s, const ComplexMatrix &h, int t_len, std::uint64_t seed)
{
    FrameDraws d;
    d.symbols_per_draw = s.columns();
    const int draws = (t_len + d.symbols_per_draw - 1) / d.symbols_per_draw;
    Rng rng = Rng::stream(seed, {0});
    for (int k = 0; k < draws; ++k)
    {
        const ComplexMatrix b = sample_beamformer(s, rng);
        d.gains.push_back(h.adjoint() * b);
        d.power.push_back(b.squaredNorm());
    }
    return d;
}

cdouble qpsk(int b0, int b1)
{
    constexpr double a = std::numbers::sqrt2 / 2.0;
    return {b0 ? -a : a, b1 ? -a : a};
}

} // namespace

FrameTrace simulate_frame(const SbfSampler &s, const ChannelSet &channels, double p, int t_len, std::uint64_t seed)
{
    check_link_args(s, channels, p, t_len);
    const ComplexMatrix h = channels.as_matrix();
    const FrameDraws d = draw_frame(s, h, t_len, seed);
    const int m = channels.n_users;

    FrameTrace tr;
    tr.scheme = s.kind;
    tr.t_len = t_len;
    tr.seed = seed;
    tr.snr.resize(m, t_len);
    tr.power.resize(t_len);
    for (int t = 0; t < t_len; ++t)
    {
        const auto k = static_cast<std::size_t>(t / d.symbols_per_draw);
        tr.snr.col(t) = p * d.gains[k].rowwise().squaredNorm();
        tr.power(t) = d.power[k];
    }

    // rate and its standard error over the independent draws
    const auto n = static_cast<double>(d.gains.size());
    tr.rate = RealVector::Zero(m);
    tr.rate_se = RealVector::Zero(m);
    for (int i = 0; i < m; ++i)
    {
        double sum = 0.0;
        for (int t = 0; t < t_len; ++t)
            sum += std::log1p(tr.snr(i, t));
        tr.rate(i) = sum / t_len;
        if (d.gains.size() < 2)
            continue;
        // centered on the first draw so constant sequences give exactly zero
        const double ref = std::log1p(p * d.gains.front().row(i).squaredNorm());
        double mean = 0.0, ss = 0.0;
        for (const auto &g : d.gains)
            mean += std::log1p(p * g.row(i).squaredNorm()) - ref;
        mean /= n;
        for (const auto &g : d.gains)
            ss += std::pow(std::log1p(p * g.row(i).squaredNorm()) - ref - mean, 2);
        tr.rate_se(i) = std::sqrt(ss / (n - 1.0) / n);
    }
    return tr;
}

FrameTrace simulate_frame(SchemeKind scheme, const McSolution &mc, const ChannelSet &channels, double p, int t_len,
                          std::uint64_t seed)
{
    return simulate_frame(SbfSampler::stochastic(scheme, mc), channels, p, t_len, seed);
}

double alamouti_effective_snr(const ComplexMatrix &b, const ComplexVector &h, double p, int blocks, Rng &rng)
{
    if (b.cols() != 2 || b.rows() != h.size())
        throw invalid_input_error("alamouti_effective_snr: B must be N x 2 and match h.");
    if (blocks < 0 || !(p >= 0.0))
        throw invalid_input_error("alamouti_effective_snr: invalid arguments.");

    const double sp = std::sqrt(p);
    const cdouble g1 = h.dot(b.col(0)), g2 = h.dot(b.col(1)); // h^H b_k
    auto transmit = [&](cdouble s1, cdouble s2, cdouble n1, cdouble n2) {
        // columns of B C(s) are the two symbol periods
        const ComplexVector x1 = sp * (b.col(0) * s1 + b.col(1) * s2);
        const ComplexVector x2 = sp * (-b.col(0) * std::conj(s2) + b.col(1) * std::conj(s1));
        const cdouble y1 = h.dot(x1) + n1, y2 = h.dot(x2) + n2;
        return std::pair<cdouble, cdouble>{std::conj(g1) * y1 + g2 * std::conj(y2),
                                           std::conj(g2) * y1 - g1 * std::conj(y2)};
    };

    if (blocks == 0)
    {
        // signal gain from a unit probe, noise gain from a unit noise sample on each slot
        const double gain = std::abs(transmit(1.0, 0.0, 0.0, 0.0).first) / std::max(sp, 1e-300);
        const double noise = std::norm(transmit(0.0, 0.0, 1.0, 0.0).first) + std::norm(transmit(0.0, 0.0, 0.0, 1.0).first);
        if (noise == 0.0)
            return 0.0;
        return p * gain * gain / noise;
    }

    const double scale = (std::norm(g1) + std::norm(g2)) * sp;
    double sig = 0.0, noise = 0.0;
    for (int k = 0; k < blocks; ++k)
    {
        const cdouble s1 = qpsk(rng.bit(), rng.bit()), s2 = qpsk(rng.bit(), rng.bit());
        const auto [e1, e2] = transmit(s1, s2, rng.standard_cn(), rng.standard_cn());
        sig += std::norm(scale * s1) + std::norm(scale * s2);
        noise += std::norm(e1 - scale * s1) + std::norm(e2 - scale * s2);
    }
    return noise > 0.0 ? sig / noise : 0.0;
}

double BerResult::sigma() const
{
    if (bits <= 0 || expected_ber.size() == 0)
        return 0.0;
    const double q = std::clamp(expected_ber(worst_user), 0.0, 1.0);
    return std::sqrt(q * (1.0 - q) / static_cast<double>(bits));
}

BerResult uncoded_ber(const SbfSampler &s, const ChannelSet &channels, double p, int frames, int t_len,
                      std::uint64_t seed)
{
    check_link_args(s, channels, p, t_len);
    if (frames < 1)
        throw invalid_input_error("uncoded_ber: frames must be positive.");
    const ComplexMatrix h = channels.as_matrix();
    const int m = channels.n_users;
    const double sp = std::sqrt(p);

    std::vector<Eigen::VectorXd> errors(static_cast<std::size_t>(frames)), expected(errors.size());
    parallel_for(errors.size(), [&](std::size_t f) {
        const std::uint64_t fseed = mix_seed(seed, {f});
        const FrameDraws d = draw_frame(s, h, t_len, fseed);
        Rng rng = Rng::stream(fseed, {1});
        Eigen::VectorXd err = Eigen::VectorXd::Zero(m), exp_err = Eigen::VectorXd::Zero(m);
        int t = 0;
        for (const auto &g : d.gains)
        {
            const int syms = std::min(d.symbols_per_draw, t_len - t);
            // symbols shared by all users (multicast), noise independent per user
            int bits[2][2];
            cdouble sym[2];
            for (int k = 0; k < 2; ++k)
            {
                bits[k][0] = rng.bit();
                bits[k][1] = rng.bit();
                sym[k] = qpsk(bits[k][0], bits[k][1]);
            }
            for (int i = 0; i < m; ++i)
            {
                cdouble est[2];
                if (d.symbols_per_draw == 1)
                {
                    const cdouble y = sp * g(i, 0) * sym[0] + rng.standard_cn();
                    est[0] = std::conj(g(i, 0)) * y;
                }
                else
                {
                    const cdouble g1 = g(i, 0), g2 = g(i, 1);
                    // a trailing half block still sends both Alamouti slots; only s1 is counted
                    const cdouble y1 = sp * (g1 * sym[0] + g2 * sym[1]) + rng.standard_cn();
                    const cdouble y2 = sp * (-g1 * std::conj(sym[1]) + g2 * std::conj(sym[0])) + rng.standard_cn();
                    est[0] = std::conj(g1) * y1 + g2 * std::conj(y2);
                    est[1] = std::conj(g2) * y1 - g1 * std::conj(y2);
                }
                const double snr = p * g.row(i).squaredNorm();
                for (int k = 0; k < syms; ++k)
                {
                    // Gray QPSK: each bit is the sign of one quadrature
                    err(i) += ((est[k].real() < 0.0) != (bits[k][0] == 1)) ? 1.0 : 0.0;
                    err(i) += ((est[k].imag() < 0.0) != (bits[k][1] == 1)) ? 1.0 : 0.0;
                    exp_err(i) += 2.0 * q_function(std::sqrt(snr));
                }
            }
            t += syms;
        }
        errors[f] = err;
        expected[f] = exp_err;
    });

    BerResult res;
    res.scheme = s.kind;
    res.p = p;
    res.frames = frames;
    res.t_len = t_len;
    res.bits = 2LL * t_len * frames;
    res.ber = RealVector::Zero(m);
    res.expected_ber = RealVector::Zero(m);
    for (std::size_t f = 0; f < errors.size(); ++f)
    {
        res.ber += errors[f];
        res.expected_ber += expected[f];
    }
    res.ber /= static_cast<double>(res.bits);
    res.expected_ber /= static_cast<double>(res.bits);
    Eigen::Index arg = 0;
    res.worst_user_ber = res.ber.maxCoeff(&arg);
    res.worst_user = static_cast<int>(arg);
    return res;
}

} // namespace mphy

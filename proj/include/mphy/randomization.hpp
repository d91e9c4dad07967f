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

#ifndef MPHY_RANDOMIZATION_HPP
#define MPHY_RANDOMIZATION_HPP

#include "mphy/capacity.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mphy
{

// Unit-norm transmit beamformer extracted from W*.
struct BeamformerRank1
{
    ComplexVector w;
    double worst_snr = 0.0; // min_i |h_i^H w|^2 on the design instance
    int candidate = 0;      // index of the winning draw
};

// N x 2 beamformed Alamouti matrix with Tr(B B^H) = 1.
struct BeamformerRank2
{
    ComplexMatrix b;
    double worst_snr = 0.0; // min_i h_i^H B B^H h_i
    int candidate = 0;

    HermitianMatrix covariance() const { return HermitianMatrix(b * b.adjoint()); }
};

// Candidate j is drawn from the stream (key, j) with key = rng.next_u64(), so the best of
// the first L candidates is nondecreasing in L and independent of the thread count.
// num_rand = 0 selects 30 M N.
BeamformerRank1 randomize_rank1(const McSolution &mc, const ChannelSet &channels, int num_rand, Rng &rng);

// Gaussian randomization for the beamformed Alamouti code:
// B~ = [xi_1 xi_2] / sqrt(2) with xi ~ CN(0, W*), B^ = B~ / sqrt(Tr(B~ B~^H)), keep the best worst-user SNR.
BeamformerRank2 randomize_rank2_alamouti(const McSolution &mc, const ChannelSet &channels, int num_rand, Rng &rng);

int default_num_rand(const ChannelSet &channels);

// min_i log(1 + P h_i^H W h_i); W = w w^H or B B^H
double rate_from_covariance(const HermitianMatrix &w, const ChannelSet &channels, double p);

// log((1 + rho P) / (1 + rho P / (8 M)))
double gap_bound_rank1(double rho_min, double p, int m);
// log((1 + rho P) / (1 + rho P / (12.22 sqrt(M))))
double gap_bound_rank2(double rho_min, double p, int m);

// SNR loss factors of the two randomization guarantees
inline double rank1_bound_factor(int m) { return 8.0 * m; }
double rank2_bound_factor(int m); // 12.22 sqrt(M)

// Constant in front of sqrt(M) as used in the rank-two guarantee, and the value
// alpha * e * sqrt(2.4) it rounds.
inline constexpr double rank2_constant = 12.22;
double rank2_constant_derived();

// Tail-bound parameters of the rank-two analysis
double tail_alpha_star();         // 2 ln 2.4 - 4 ln(3/4)
double tail_beta_star(int m);     // 1 / (e sqrt(2.4 M))
double lower_tail_bound(double beta); // exp(2 (1 - beta + ln beta)), beta in (0, 1)
double upper_tail_bound(double alpha); // exp(-(alpha + 4 ln(3/4)) / 2), alpha >= 4/3

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

enum class BoundKind
{
    Rank1Snr,       // worst SNR >= rho_min / (8 M)
    Rank2Snr,       // worst SNR >= rho_min / (12.22 sqrt M)
    LowerTail,      // Pr(Tr(W~ mu mu^H) <= beta Tr(W* mu mu^H)) <= exp(2 (1 - beta + ln beta))
    UpperTail,      // Pr(Tr W~ >= alpha Tr W*) <= exp(-(alpha + 4 ln 3/4) / 2)
};

std::string to_string(BoundKind kind);

// One audited inequality. For the SNR guarantees every instance is one Bernoulli trial
// (success = bound met, required frequency 1 - (5/6)^L). For the tail bounds each
// sample of W~ is a trial (success = tail event), and the requirement is an upper
// limit on the frequency.
struct BoundAuditReport
{
    BoundKind bound_kind = BoundKind::Rank1Snr;
    double parameter = 0.0;          // beta or alpha for tail bounds, L for SNR bounds
    int instances = 0;               // number of Bernoulli trials
    double satisfaction_frequency = 0.0;
    double required_frequency = 0.0;
    bool upper_limit = false;        // true: frequency must stay below required_frequency
    std::vector<double> ratios;      // SNR bounds: worst_snr / rho_min per instance

    double sigma() const;            // binomial standard deviation at the required frequency
    bool satisfied() const;          // within 3 sigma of the requirement
};

struct RandomizationAuditConfig
{
    int n_antennas = 4;
    int n_users = 24;
    int instances = 300;
    int num_rand = 0; // 0 selects 30 M N
    std::uint64_t seed = 1;
};

// Fact-style guarantees over random instances: one report for rank one, one for rank two.
std::vector<BoundAuditReport> audit_randomization(const RandomizationAuditConfig &config);

// Tail inequalities for W~ = B~ B~^H, B~ = [xi_1 xi_2] / sqrt 2, xi ~ CN(0, W*), at
// beta in {0.1, 0.5, 1 / (e sqrt(2.4 M))} and alpha in {4/3, 2 ln 2.4 - 4 ln(3/4)}.
// mu is drawn once from CN(0, I). m sets the beta* point.
std::vector<BoundAuditReport> audit_tail_bounds(const HermitianMatrix &w_star, int m, int trials, Rng &rng);

} // namespace mphy

#endif

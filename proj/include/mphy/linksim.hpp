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

#ifndef MPHY_LINKSIM_HPP
#define MPHY_LINKSIM_HPP

#include "mphy/sbf.hpp"

#include <cstdint>

namespace mphy
{

// Per-symbol SNR record of one frame. Alamouti schemes draw one B per two-symbol block;
// both symbols of a block carry the same SNR.
struct FrameTrace
{
    SchemeKind scheme = SchemeKind::GaussianSBF;
    Eigen::MatrixXd snr; // M x T, SNR_i(t) = P |h_i^H w(t)|^2 or P h_i^H B B^H h_i
    RealVector power;    // transmit power |w(t)|^2 or Tr(B B^H), length T
    RealVector rate;     // (1/T) sum_t log(1 + SNR_i(t)), nats
    RealVector rate_se;  // standard error of rate, from independent draws (blocks for Alamouti)
    int t_len = 0;
    std::uint64_t seed = 0;
};

// The beamformer sequence is drawn from Rng::stream(seed, {0}); the receiver regenerates
// it from the same seed, so reception is coherent.
FrameTrace simulate_frame(const SbfSampler &sampler, const ChannelSet &channels, double p, int t_len,
                          std::uint64_t seed);
FrameTrace simulate_frame(SchemeKind scheme, const McSolution &mc, const ChannelSet &channels, double p, int t_len,
                          std::uint64_t seed);

// One Alamouti block X = sqrt(P) B [s1 -s2*; s2 s1*] through y = h^H X + n, followed by
// the orthogonal combiner s1^ = g1* y1 + g2 y2*, s2^ = g2* y1 - g1 y2* with g = h^H B.
// blocks = 0 is the noiseless probe: the SNR follows from the measured combiner gain and
// the combiner's noise gain. Otherwise the signal and noise powers are estimated from
// `blocks` random QPSK blocks with unit-variance noise.
double alamouti_effective_snr(const ComplexMatrix &b, const ComplexVector &h, double p, int blocks, Rng &rng);

struct BerResult
{
    SchemeKind scheme = SchemeKind::GaussianSBF;
    double p = 0.0;
    int frames = 0;
    int t_len = 0;
    long long bits = 0;       // per user: 2 T frames
    RealVector ber;           // simulated, per user
    RealVector expected_ber;  // mean of Q(sqrt(SNR)) over the same beamformer draws
    double worst_user_ber = 0.0;
    int worst_user = 0;

    // binomial standard deviation of the worst user's BER at its expected value
    double sigma() const;
};

// Gray-mapped QPSK, coherent ML detection, unit-variance noise. Frame f uses the seed
// mix_seed(seed, {f}) for its beamformers (same draws as simulate_frame with that seed)
// and a separate substream for symbols and noise.
BerResult uncoded_ber(const SbfSampler &sampler, const ChannelSet &channels, double p, int frames, int t_len,
                      std::uint64_t seed);

} // namespace mphy

#endif

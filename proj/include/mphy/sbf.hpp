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

#ifndef MPHY_SBF_HPP
#define MPHY_SBF_HPP

#include "mphy/capacity.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace mphy
{

// ---------------------------------------------------------------------------
// Transmit schemes
// ---------------------------------------------------------------------------
enum class SchemeKind
{
    FixedBF,
    FixedAlamouti,
    GaussianSBF,
    EllipticSBF,
    BinghamSBF,
    GaussianSBFAlamouti,
    EllipticSBFAlamouti,
    BinghamSBFAlamouti,
};

inline constexpr std::array<SchemeKind, 8> all_schemes = {
    SchemeKind::FixedBF,           SchemeKind::FixedAlamouti,       SchemeKind::GaussianSBF,
    SchemeKind::EllipticSBF,       SchemeKind::BinghamSBF,          SchemeKind::GaussianSBFAlamouti,
    SchemeKind::EllipticSBFAlamouti, SchemeKind::BinghamSBFAlamouti,
};

// "fixed-bf", "fixed-alamouti", "gaussian-sbf", ..., "bingham-sbf-alamouti"
std::string to_string(SchemeKind kind);
// Accepts the names above; throws invalid_input_error otherwise.
SchemeKind parse_scheme(const std::string &name);

bool is_alamouti(SchemeKind kind);
bool is_fixed(SchemeKind kind);

// Beamformer distribution. SBF kinds carry the square-root factor L of W*; fixed kinds
// carry their deterministic N x 1 or N x 2 design.
struct SbfSampler
{
    SchemeKind kind = SchemeKind::GaussianSBF;
    SquareRootFactor factor;
    ComplexMatrix design;

    static SbfSampler stochastic(SchemeKind kind, const SquareRootFactor &factor);
    static SbfSampler stochastic(SchemeKind kind, const McSolution &mc);
    static SbfSampler fixed_bf(const ComplexVector &w);
    static SbfSampler fixed_alamouti(const ComplexMatrix &b);

    Eigen::Index n_antennas() const;
    int columns() const { return is_alamouti(kind) ? 2 : 1; }
    int rank() const { return factor.rank; }
};

// One draw: N x 1 beamformer w or N x 2 matrix B. Draws with L^H alpha = 0 are
// redrawn (probability zero); the count is added to *redraws when given.
ComplexMatrix sample_beamformer(const SbfSampler &sampler, Rng &rng, int *redraws = nullptr);

// ---------------------------------------------------------------------------
// Distribution of the normalized channel gain xi
// ---------------------------------------------------------------------------

// Pr(eta(u) <= t) for eta(u) = sum_i |u^H alpha_i|^2 / sum_i |alpha_i|^2, l draws of
// CN(0, I_r). Computed as one minus the binomial (incomplete-beta) sum
//     sum_{j=l(r-1)}^{lr-1} C(lr-1, j) x^j (1-x)^{lr-1-j},  x = (|u|^2 - t) / |u|^2.
double eta_cdf(double t, double u_norm_sq, int l, int r);

struct PointMass
{
    double location = 1.0;
};

// Density of xi for the elliptic schemes on [0, r]. r = 1 is a point mass at 1.
std::variant<double, PointMass> xi_pdf(double t, int r, bool alamouti);

// ---------------------------------------------------------------------------
// Closed-form rates (nats); x = rho P
// ---------------------------------------------------------------------------
double rate_gaussian_sbf(double rho, double p);
double rate_elliptic_sbf(double rho, double p, int r);
double rate_gaussian_sbf_alam(double rho, double p);
double rate_elliptic_sbf_alam(double rho, double p, int r);

// phi(d) = E[log sum_k d_k zeta_k], zeta_k i.i.d. unit-mean exponential.
double phi_exponential_mix(const RealVector &d);
// phi_bar(d) = phi((d / 2, d / 2)), the two-block version
double phi_bar(const RealVector &d);
// Same expectation through E log X = int_0^inf (e^{-s} - E e^{-s X}) / s ds.
double phi_quadrature(const RealVector &d);

// Per-user Bingham rate log(1 + rho_i P) + phi(mu / sum mu) - phi(lambda) with mu the
// eigenvalues of L (I + P h h^H) L^H (r x r) and lambda those of L L^H.
double rate_bingham(const SquareRootFactor &factor, const ComplexVector &h, double p, bool alamouti);
double rate_bingham(const McSolution &mc, const ComplexVector &h, double p, bool alamouti);

// Per-user closed-form rates of a scheme; the multicast rate is the minimum.
RealVector closed_form_user_rates(const SbfSampler &sampler, const ChannelSet &channels, double p);
double closed_form_rate(const SbfSampler &sampler, const ChannelSet &channels, double p);

// ---------------------------------------------------------------------------
// Worst-case gap constants
// ---------------------------------------------------------------------------
struct GapBound
{
    SchemeKind scheme = SchemeKind::GaussianSBF;
    int r = 1;
    double bound_nats = 0.0;
    double bound_bits = 0.0;
    // Fixed designs have no constant bound: the value is the P -> infinity limit of the
    // M-dependent randomization bound (log 8M or log 12.22 sqrt M), infinite when M = 0.
    bool m_dependent = false;
};

GapBound gap_bound(SchemeKind scheme, int r, int m = 0);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------
struct RateEstimate
{
    RealVector mean;       // per-user sample mean of log(1 + P h^H (w w^H or B B^H) h)
    RealVector half_width; // 1.96 standard errors
    double multicast = 0.0;
    int argmin_user = 0;
    int samples = 0;

    double ci_low() const { return multicast - half_width(argmin_user); }
    double ci_high() const { return multicast + half_width(argmin_user); }
};

// Samples are split into fixed blocks with their own substreams, so the estimate does
// not depend on the number of worker threads.
RateEstimate mc_rate_estimate(const SbfSampler &sampler, const ChannelSet &channels, double p, int samples, Rng &rng);

struct PowerSpread
{
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

// Statistics of |w|^2 (or Tr(B B^H)) over independent draws.
PowerSpread power_spread(const SbfSampler &sampler, int samples, Rng &rng);

} // namespace mphy

#endif

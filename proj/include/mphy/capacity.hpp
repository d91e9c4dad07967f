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

#ifndef MPHY_CAPACITY_HPP
#define MPHY_CAPACITY_HPP

#include "mphy/numlin.hpp"
#include "mphy/scenario.hpp"

#include <stdexcept>
#include <string>

namespace mphy
{

// Solution of the max-min covariance problem
//     max  min_i Tr(W h_i h_i^H)   s.t.  W >= 0, Tr(W) = 1
// together with its dual certificate q on the simplex:
//     min_q  lambda_max(sum_i q_i h_i h_i^H).
struct McSolution
{
    HermitianMatrix w_star;
    RealVector dual_weights;  // q
    RealVector rho;           // rho_i = h_i^H W h_i
    double rho_min = 0.0;
    int argmin_user = 0;      // lowest index attaining rho_min
    int rank_r = 0;           // numerical rank, relative threshold default_rank_tol
    double duality_gap = 0.0; // lambda_max(sum q_i H_i) - rho_min
    int iterations = 0;

    double relative_gap() const { return duality_gap / std::max(rho_min, 1e-300); }
};

// Thrown when the solver cannot certify the requested tolerance; carries the best iterate.
struct convergence_error : std::runtime_error
{
    McSolution best;
    convergence_error(const std::string &what, McSolution best_iterate)
        : std::runtime_error(what), best(std::move(best_iterate))
    {
    }
};

// Interior-point solver. Phase 1 follows the central path of the dual (lambda, q);
// phase 2 re-solves the primal restricted to the detected range of W to get an
// accurate W. max_iters counts Newton steps of both phases, 0 selects max(50 M N, 500).
McSolution solve_mc(const ChannelSet &channels, double tol = 1e-6, int max_iters = 0);

// log(1 + rho_min P) in nats
double capacity_rate(double rho_min, double p);

// Isotropic covariance I/N: min_i log(1 + P |h_i|^2 / N)
double open_loop_rate(const ChannelSet &channels, double p);

// rho_i(W) = h_i^H W h_i for all users
RealVector user_loadings(const HermitianMatrix &w, const ChannelSet &channels);

// min_i h_i^H W h_i
double worst_snr(const HermitianMatrix &w, const ChannelSet &channels);

// lambda_max(sum_i q_i h_i h_i^H), the dual objective
double dual_value(const RealVector &q, const ChannelSet &channels);

} // namespace mphy

#endif

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

#include "mphy/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace mphy
{

namespace
{

constexpr int max_center_steps = 60;
constexpr int max_phase2_rank = 16; // reduced problem has r^2 + 1 unknowns

// Self-concordant damped Newton: full step inside the quadratic region, 1/(1 + delta) outside.
double damped_step(double delta)
{
    return delta < 0.25 ? 1.0 : 1.0 / (1.0 + delta);
}

// Solves the equality-constrained Newton system [H a; a^T 0] [dx; nu] = [-g; 0].
RealVector kkt_direction(const Eigen::MatrixXd &hess, const RealVector &grad, const RealVector &a)
{
    const Eigen::Index n = grad.size();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
    kkt.topLeftCorner(n, n) = hess;
    kkt.block(0, n, n, 1) = a;
    kkt.block(n, 0, 1, n) = a.transpose();
    RealVector rhs = RealVector::Zero(n + 1);
    rhs.head(n) = -grad;
    RealVector sol = kkt.fullPivLu().solve(rhs);
    return sol.head(n);
}

// ---------------------------------------------------------------------------
// Phase 1: dual barrier on (lambda, q)
//     f = lambda - mu logdet(lambda I - sum q_i h_i h_i^H) - mu sum log q_i,  sum q = 1
// On the central path W = mu (lambda I - S)^{-1} is primal feasible and the
// duality gap equals mu (N + M).
// ---------------------------------------------------------------------------
class DualPath
{
  public:
    DualPath(const ComplexMatrix &h) : h_(h), n_(h.rows()), m_(h.cols()) {}

    ComplexMatrix slack(double lambda, const RealVector &q) const
    {
        ComplexMatrix z = -(h_ * q.cast<cdouble>().asDiagonal() * h_.adjoint());
        z.diagonal().array() += lambda;
        return 0.5 * (z + z.adjoint());
    }

    bool feasible(double lambda, const RealVector &q) const
    {
        if ((q.array() <= 0.0).any())
            return false;
        Eigen::LLT<ComplexMatrix> llt(slack(lambda, q));
        return llt.info() == Eigen::Success;
    }

    // Newton step; returns squared decrement of f / mu
    double newton(double mu, double &lambda, RealVector &q, ComplexMatrix &g_out) const
    {
        Eigen::LLT<ComplexMatrix> llt(slack(lambda, q));
        if (llt.info() != Eigen::Success)
            return -1.0;
        const ComplexMatrix g = llt.solve(ComplexMatrix::Identity(n_, n_));
        g_out = 0.5 * (g + g.adjoint());
        const ComplexMatrix gh = g_out * h_;
        const ComplexMatrix k = h_.adjoint() * gh;

        const Eigen::Index dim = m_ + 1;
        RealVector grad(dim);
        Eigen::MatrixXd hess(dim, dim);
        grad(0) = 1.0 - mu * g_out.trace().real();
        hess(0, 0) = mu * g_out.squaredNorm();
        for (Eigen::Index i = 0; i < m_; ++i)
        {
            grad(i + 1) = mu * k(i, i).real() - mu / q(i);
            hess(0, i + 1) = hess(i + 1, 0) = -mu * gh.col(i).squaredNorm();
            for (Eigen::Index j = 0; j <= i; ++j)
                hess(i + 1, j + 1) = hess(j + 1, i + 1) = mu * std::norm(k(i, j));
            hess(i + 1, i + 1) += mu / (q(i) * q(i));
        }
        RealVector a = RealVector::Ones(dim);
        a(0) = 0.0;

        const RealVector dx = kkt_direction(hess, grad, a);
        const double dec2 = std::max(0.0, -grad.dot(dx)) / mu;
        double step = damped_step(std::sqrt(dec2));
        for (int halving = 0; halving < 60; ++halving, step *= 0.5)
        {
            const double lam_new = lambda + step * dx(0);
            RealVector q_new = q + step * dx.tail(m_);
            q_new /= q_new.sum(); // keep sum q = 1 against rounding drift
            if (feasible(lam_new, q_new))
            {
                lambda = lam_new;
                q = q_new;
                return dec2;
            }
        }
        return 0.0;
    }

  private:
    const ComplexMatrix &h_;
    Eigen::Index n_, m_;
};

// ---------------------------------------------------------------------------
// Phase 2: primal barrier restricted to span(U), W = U V U^H, V r x r Hermitian
//     F = -t - mu logdet V - mu sum log(g_i^H V g_i - t),  Tr V = 1
// V is parameterized in an orthonormal basis of r x r Hermitian matrices.
// ---------------------------------------------------------------------------
class ReducedPrimal
{
  public:
    ReducedPrimal(const ComplexMatrix &g) : g_(g), r_(g.rows()), m_(g.cols())
    {
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (Eigen::Index p = 0; p < r_; ++p)
        {
            ComplexMatrix e = ComplexMatrix::Zero(r_, r_);
            e(p, p) = 1.0;
            basis_.push_back(e);
            trace_.push_back(1.0);
        }
        for (Eigen::Index p = 0; p < r_; ++p)
            for (Eigen::Index q = p + 1; q < r_; ++q)
            {
                ComplexMatrix e = ComplexMatrix::Zero(r_, r_);
                e(p, q) = e(q, p) = inv_sqrt2;
                basis_.push_back(e);
                trace_.push_back(0.0);
                e(p, q) = cdouble(0.0, inv_sqrt2);
                e(q, p) = cdouble(0.0, -inv_sqrt2);
                basis_.push_back(e);
                trace_.push_back(0.0);
            }
        const auto nb = static_cast<Eigen::Index>(basis_.size());
        a_.resize(m_, nb);
        for (Eigen::Index i = 0; i < m_; ++i)
            for (Eigen::Index k = 0; k < nb; ++k)
                a_(i, k) = g_.col(i).dot(basis_[static_cast<std::size_t>(k)] * g_.col(i)).real();
    }

    Eigen::Index params() const { return static_cast<Eigen::Index>(basis_.size()); }

    ComplexMatrix assemble(const RealVector &v) const
    {
        ComplexMatrix out = ComplexMatrix::Zero(r_, r_);
        for (std::size_t k = 0; k < basis_.size(); ++k)
            out += v(static_cast<Eigen::Index>(k)) * basis_[k];
        return out;
    }

    RealVector coordinates(const ComplexMatrix &vm) const
    {
        RealVector v(params());
        for (std::size_t k = 0; k < basis_.size(); ++k)
            v(static_cast<Eigen::Index>(k)) = (basis_[k] * vm).trace().real();
        return v;
    }

    RealVector loadings(const RealVector &v) const { return a_ * v; }

    bool feasible(const RealVector &v, double t) const
    {
        if (((a_ * v).array() - t <= 0.0).any())
            return false;
        Eigen::LLT<ComplexMatrix> llt(assemble(v));
        return llt.info() == Eigen::Success;
    }

    double newton(double mu, RealVector &v, double &t) const
    {
        const Eigen::Index nb = params();
        const ComplexMatrix vm = assemble(v);
        Eigen::LLT<ComplexMatrix> llt(vm);
        if (llt.info() != Eigen::Success)
            return -1.0;
        const ComplexMatrix vinv = llt.solve(ComplexMatrix::Identity(r_, r_));
        const RealVector s = (a_ * v).array() - t;

        std::vector<ComplexMatrix> y(static_cast<std::size_t>(nb));
        for (Eigen::Index k = 0; k < nb; ++k)
            y[static_cast<std::size_t>(k)] = vinv * basis_[static_cast<std::size_t>(k)];

        const Eigen::Index dim = nb + 1;
        RealVector grad = RealVector::Zero(dim);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index k = 0; k < nb; ++k)
        {
            const auto &yk = y[static_cast<std::size_t>(k)];
            grad(k) = -mu * yk.trace().real();
            for (Eigen::Index l = 0; l <= k; ++l)
            {
                const auto &yl = y[static_cast<std::size_t>(l)];
                const double tr = (yk.array() * yl.transpose().array()).sum().real();
                hess(k, l) = hess(l, k) = mu * tr;
            }
        }
        grad(nb) = -1.0;
        RealVector c(dim);
        for (Eigen::Index i = 0; i < m_; ++i)
        {
            c.head(nb) = a_.row(i).transpose();
            c(nb) = -1.0;
            grad -= (mu / s(i)) * c;
            hess.noalias() += (mu / (s(i) * s(i))) * c * c.transpose();
        }
        RealVector a = RealVector::Zero(dim);
        for (Eigen::Index k = 0; k < nb; ++k)
            a(k) = trace_[static_cast<std::size_t>(k)];

        const RealVector dx = kkt_direction(hess, grad, a);
        const double dec2 = std::max(0.0, -grad.dot(dx)) / mu;
        double step = damped_step(std::sqrt(dec2));
        for (int halving = 0; halving < 60; ++halving, step *= 0.5)
        {
            const RealVector v_new = v + step * dx.head(nb);
            const double t_new = t + step * dx(nb);
            if (feasible(v_new, t_new))
            {
                v = v_new;
                t = t_new;
                return dec2;
            }
        }
        return 0.0;
    }

  private:
    ComplexMatrix g_;
    Eigen::Index r_, m_;
    std::vector<ComplexMatrix> basis_;
    std::vector<double> trace_;
    Eigen::MatrixXd a_;
};

double lambda_max_of(const ComplexMatrix &h, const RealVector &q)
{
    ComplexMatrix s = h * q.cast<cdouble>().asDiagonal() * h.adjoint();
    return eig_hermitian(HermitianMatrix(0.5 * (s + s.adjoint()))).lambda_max();
}

// Fills rho / rho_min / argmin / rank / gap of a solution from W and q (scaled channels h).
McSolution finish(const ComplexMatrix &w_raw, const RealVector &q, const ChannelSet &cs, const ComplexMatrix &h,
                  double scale, int iterations)
{
    ComplexMatrix w = 0.5 * (w_raw + w_raw.adjoint());
    w /= w.trace().real();
    // drop the interior-point residue below the rank threshold so W* = L^H L exactly
    const SquareRootFactor f = sqrt_factor(HermitianMatrix(w));
    w = f.l.adjoint() * f.l;
    w /= w.trace().real();

    McSolution sol;
    sol.w_star = HermitianMatrix(w);
    sol.dual_weights = q;
    sol.rho = user_loadings(sol.w_star, cs);
    Eigen::Index arg = 0;
    sol.rho_min = sol.rho.minCoeff(&arg);
    sol.argmin_user = static_cast<int>(arg);
    sol.duality_gap = scale * lambda_max_of(h, q) - sol.rho_min;
    sol.rank_r = sqrt_factor(sol.w_star).rank;
    sol.iterations = iterations;
    return sol;
}

McSolution trivial_single_user(const ChannelSet &cs)
{
    const ComplexVector &h = cs.channels.front();
    McSolution sol;
    sol.w_star = HermitianMatrix(h * h.adjoint() / h.squaredNorm());
    sol.dual_weights = RealVector::Ones(1);
    sol.rho = RealVector::Constant(1, h.squaredNorm());
    sol.rho_min = h.squaredNorm();
    sol.argmin_user = 0;
    sol.rank_r = 1;
    sol.duality_gap = 0.0;
    return sol;
}

McSolution trivial_single_antenna(const ChannelSet &cs)
{
    McSolution sol;
    sol.w_star = HermitianMatrix::identity(1);
    sol.rho.resize(cs.n_users);
    for (int i = 0; i < cs.n_users; ++i)
        sol.rho(i) = cs.channels[static_cast<std::size_t>(i)].squaredNorm();
    Eigen::Index arg = 0;
    sol.rho_min = sol.rho.minCoeff(&arg);
    sol.argmin_user = static_cast<int>(arg);
    sol.dual_weights = RealVector::Zero(cs.n_users);
    sol.dual_weights(arg) = 1.0;
    sol.rank_r = 1;
    sol.duality_gap = 0.0;
    return sol;
}

} // namespace

McSolution solve_mc(const ChannelSet &channels, double tol, int max_iters)
{
    channels.validate();
    if (!(tol > 0.0))
        throw invalid_input_error("solve_mc: tol must be positive.");
    if (channels.n_users == 1)
        return trivial_single_user(channels);
    if (channels.n_antennas == 1)
        return trivial_single_antenna(channels);

    const Eigen::Index n = channels.n_antennas;
    const Eigen::Index m = channels.n_users;
    if (max_iters <= 0)
        max_iters = std::max(50 * static_cast<int>(m * n), 500);

    // Work with channels scaled to max |h_i|^2 = 1; W is scale invariant.
    ComplexMatrix h = channels.as_matrix();
    const double scale = h.colwise().squaredNorm().maxCoeff();
    h /= std::sqrt(scale);

    int iterations = 0;
    auto budget_left = [&] { return iterations < max_iters; };

    // ---- phase 1 ----
    DualPath dual(h);
    RealVector q = RealVector::Constant(m, 1.0 / static_cast<double>(m));
    double lambda = 1.5 * lambda_max_of(h, q) + 1e-3;
    double mu = lambda / static_cast<double>(n + m);
    const double path_stop = std::max(1e-3 * tol, 1e-13);
    ComplexMatrix g;

    while (budget_left())
    {
        for (int k = 0; k < max_center_steps && budget_left(); ++k)
        {
            const double dec2 = dual.newton(mu, lambda, q, g);
            ++iterations;
            if (dec2 < 1e-14)
                break;
        }
        if (mu * static_cast<double>(n + m) <= path_stop * lambda)
            break;
        mu /= 10.0;
    }
    dual.newton(mu, lambda, q, g); // refresh G at the final iterate (no step counted)
    const ComplexMatrix w_phase1 = g / g.trace().real();

    // Phase-1 W inherits the conditioning of lambda I - S, so it is only kept when it
    // already certifies well below tol.
    const double target = 1e-2 * tol;
    McSolution best = finish(w_phase1, q, channels, h, scale, iterations);
    if (best.relative_gap() <= target)
        return best;

    // ---- phase 2 ----
    const SpectralDecomposition sd = eig_hermitian(HermitianMatrix(w_phase1));
    int r_guess = 0;
    while (r_guess < n && sd.eigenvalues(r_guess) > 1e-6 * sd.lambda_max())
        ++r_guess;
    r_guess = std::max(r_guess, 1);

    for (int r = r_guess; r <= std::min<int>(static_cast<int>(n), max_phase2_rank) && budget_left(); ++r)
    {
        const ComplexMatrix u = sd.eigenvectors.leftCols(r);
        ReducedPrimal primal(u.adjoint() * h);

        // warm start: phase-1 W compressed to the subspace, pulled towards I / r
        ComplexMatrix v0 = u.adjoint() * w_phase1 * u;
        v0 = 0.9 * v0 / v0.trace().real() + 0.1 * ComplexMatrix::Identity(r, r) / static_cast<double>(r);
        RealVector v = primal.coordinates(0.5 * (v0 + v0.adjoint()));
        const RealVector load0 = primal.loadings(v);
        double t = load0.minCoeff() - 0.5 * std::abs(load0.minCoeff()) - 1e-3;
        double mu2 = 1e-2 * load0.mean() / static_cast<double>(r + m);

        while (budget_left())
        {
            for (int k = 0; k < max_center_steps && budget_left(); ++k)
            {
                const double dec2 = primal.newton(mu2, v, t);
                ++iterations;
                if (dec2 < 1e-14)
                    break;
            }
            if (mu2 * static_cast<double>(r + m) <= path_stop * std::abs(t))
                break;
            mu2 /= 10.0;
        }

        // dual estimate from the primal path: q_i proportional to mu / s_i
        const RealVector s = primal.loadings(v).array() - t;
        RealVector q2 = mu2 / s.array();
        q2 /= q2.sum();
        const bool use_q2 = lambda_max_of(h, q2) < lambda_max_of(h, q);

        const ComplexMatrix w = u * primal.assemble(v) * u.adjoint();
        McSolution cand = finish(w, use_q2 ? q2 : q, channels, h, scale, iterations);
        if (cand.duality_gap < best.duality_gap)
            best = cand;
        if (cand.relative_gap() <= target)
            return cand;
    }

    best.iterations = iterations;
    if (best.relative_gap() <= tol)
        return best;
    throw convergence_error("solve_mc: relative duality gap " + std::to_string(best.relative_gap()) +
                                " above tolerance after " + std::to_string(iterations) + " Newton steps",
                            best);
}

double capacity_rate(double rho_min, double p)
{
    if (rho_min < 0.0 || p < 0.0 || std::isnan(rho_min) || std::isnan(p))
        throw std::domain_error("capacity_rate: rho_min and P must be nonnegative.");
    return std::log1p(rho_min * p);
}

double open_loop_rate(const ChannelSet &channels, double p)
{
    if (p < 0.0)
        throw std::domain_error("open_loop_rate: P must be nonnegative.");
    double worst = std::numeric_limits<double>::infinity();
    for (const auto &h : channels.channels)
        worst = std::min(worst, h.squaredNorm());
    return std::log1p(p * worst / static_cast<double>(channels.n_antennas));
}

RealVector user_loadings(const HermitianMatrix &w, const ChannelSet &channels)
{
    if (w.dim() != channels.n_antennas)
        throw invalid_input_error("user_loadings: dimension mismatch.");
    RealVector rho(channels.n_users);
    for (int i = 0; i < channels.n_users; ++i)
        rho(i) = w.quadratic_form(channels.channels[static_cast<std::size_t>(i)]);
    return rho;
}

double worst_snr(const HermitianMatrix &w, const ChannelSet &channels)
{
    return user_loadings(w, channels).minCoeff();
}

double dual_value(const RealVector &q, const ChannelSet &channels)
{
    if (q.size() != channels.n_users)
        throw invalid_input_error("dual_value: weight vector has wrong length.");
    return lambda_max_of(channels.as_matrix(), q);
}

} // namespace mphy

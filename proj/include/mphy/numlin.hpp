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

#ifndef MPHY_NUMLIN_HPP
#define MPHY_NUMLIN_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace mphy
{

using cdouble = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Euler-Mascheroni constant
inline constexpr double euler_gamma = 0.57721566490153286060651209;

// Error types. Everything derives from the std hierarchy so callers can catch broadly.
struct invalid_input_error : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct not_psd_error : std::domain_error
{
    double min_eigenvalue;
    not_psd_error(const std::string &what, double lambda_min) : std::domain_error(what), min_eigenvalue(lambda_min) {}
};

// Dense Hermitian matrix. Construction symmetrizes the input, so A == A^H holds exactly
// for every stored instance (diagonal is real, lower triangle mirrors the upper one).
class HermitianMatrix
{
  public:
    HermitianMatrix() = default;

    // Throws invalid_input_error on non-square or non-finite input, or when the input is
    // not Hermitian to within `hermitian_tol` (relative to its Frobenius norm).
    explicit HermitianMatrix(const ComplexMatrix &a, double hermitian_tol = 1e-8);

    static HermitianMatrix identity(Eigen::Index n);
    static HermitianMatrix outer(const ComplexVector &v); // v v^H

    Eigen::Index dim() const { return a_.rows(); }
    const ComplexMatrix &matrix() const { return a_; }
    cdouble operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

    double trace() const { return a_.diagonal().real().sum(); }
    // x^H A x, real by construction
    double quadratic_form(const ComplexVector &x) const;

    HermitianMatrix scaled(double s) const;

  private:
    ComplexMatrix a_;
};

// Eigenvalues sorted descending, eigenvectors as unitary columns.
struct SpectralDecomposition
{
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;

    double lambda_max() const { return eigenvalues(0); }
    double lambda_min() const { return eigenvalues(eigenvalues.size() - 1); }
};

// L (r x N) with L^H L = W; rows of L span range(W).
struct SquareRootFactor
{
    ComplexMatrix l;
    int rank = 0;
    double source_tol = 0.0;

    Eigen::Index dim() const { return l.cols(); }
};

// Cyclic complex Jacobi eigensolver for Hermitian matrices (N <= 64).
SpectralDecomposition eig_hermitian(const HermitianMatrix &a);

// Square-root factor of a PSD matrix. Eigenvalues below -rel_tol * max(Tr W, lambda_max)
// raise not_psd_error; the numerical rank counts eigenvalues above rel_tol * lambda_max.
inline constexpr double default_rank_tol = 1e-9;
SquareRootFactor sqrt_factor(const HermitianMatrix &w, double rel_tol = default_rank_tol);

// Exponential integral E1(x) = int_1^inf exp(-x t) / t dt, x > 0.
double exp_integral_e1(double x);
// exp(x) * E1(x), stable for large x where E1 underflows.
double exp_integral_e1_scaled(double x);

// sum_{k=1}^{n} 1/k, harmonic(0) = 0
double harmonic(int n);

double binomial(int n, int k);

// Standard normal upper tail Q(x) = P(Z > x)
double q_function(double x);

// Adaptive Gauss-Kronrod quadrature on [a, b] and on [a, inf).
double integrate(const std::function<double(double)> &f, double a, double b, double rel_tol = 1e-13);
double integrate_to_infinity(const std::function<double(double)> &f, double a, double rel_tol = 1e-13);

// ---------------------------------------------------------------------------
// Deterministic random streams.
//
// Every stream is keyed by a 64-bit master seed plus a list of counters
// (instance id, candidate id, block id, ...). The key is mixed with splitmix64
// and seeds a mt19937_64 engine; all transforms to floating point are written
// out explicitly so results are identical across platforms and thread counts.
// ---------------------------------------------------------------------------
class Rng
{
  public:
    explicit Rng(std::uint64_t seed);

    // Derived substream, independent of scheduling.
    static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> ids);

    std::uint64_t next_u64();
    double uniform();        // [0, 1)
    double uniform_open();   // (0, 1)
    double normal();         // N(0, 1)
    cdouble standard_cn();   // CN(0, 1): real and imaginary parts with variance 1/2
    int bit() { return static_cast<int>(next_u64() >> 63); }

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t &state);
std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids);

// dim i.i.d. CN(0, 1) entries
ComplexVector sample_standard_cn(Rng &rng, Eigen::Index dim);

} // namespace mphy

#endif

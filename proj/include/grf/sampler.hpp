// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "grf/chebyshev.hpp"
#include "grf/operators.hpp"
#include "grf/rng.hpp"

namespace grf {

// One draw of the discretized field: weights are the coefficients in the
// hat basis, which for linear elements are the nodal values.
struct FieldSample {
    Eigen::VectorXd weights;
    std::uint64_t seed = 0;
    std::uint64_t sample_index = 0;
    int cheb_order = 0;
    double lambda_max = 0.0;
};

// Draws W ~ N(0, I_n), accumulates X = sum_k a_k T_k(M) W with
// M = (2/lambda_max) S - I by the three-term recurrence (one apply_S per
// term), and returns Z = solve_sqrtC_T(X). The result is exactly
// N(0, (sqrtC)^-T P^2(S) (sqrtC)^-1) distributed with P the series
// polynomial. The series must target the operator's own lambda_max; a
// mismatch is a configuration bug and raises rather than refits.
FieldSample sample_weights(const GalerkinOperator& op, const ChebyshevSeries& series,
                           NormalStream& rng);

// Sample with the stream derived from (base_seed, sample_index); the
// deterministic primitive behind sample_batch.
FieldSample sample_indexed(const GalerkinOperator& op, const ChebyshevSeries& series,
                           std::uint64_t base_seed, std::uint64_t sample_index);

// `count` independent samples. Sample i uses the stream keyed by
// (base_seed, i), so the batch is a pure function of base_seed: any
// worker_count (threads) yields byte-identical output.
std::vector<FieldSample> sample_batch(const GalerkinOperator& op, const ChebyshevSeries& series,
                                      long count, std::uint64_t base_seed, int worker_count = 1);

// Exact covariance of the weights under the target density (small-n oracle
// through dense_eigs): (sqrtC)^-T V diag(gamma(lambda)^2) V^T (sqrtC)^-1.
Eigen::MatrixXd exact_weight_covariance(const GalerkinOperator& op,
                                        const PowerSpectralDensity& psd, int dense_cap = 3000);

// Entries of exact_weight_covariance at vertex pairs; for hat functions
// the field value at vertex i is weight i, so these are field covariances.
std::vector<double> galerkin_covariance_at(const GalerkinOperator& op,
                                           const PowerSpectralDensity& psd,
                                           const std::vector<std::pair<int, int>>& pairs,
                                           int dense_cap = 3000);

// Covariance of the sampled field between an interpolation vector phi0 and
// each column of targets, under the series polynomial:
//   cov(x0, y) = phi0^T (sqrtC)^-T P(S)^2 (sqrtC)^-1 phi_y.
// Evaluated without any eigendecomposition: two polynomial recurrences on
// a single vector plus one triangular solve, so it scales to any n. The
// same quantity as the dense route through dense_eigs (they agree to
// roundoff); used by the convergence studies for deterministic covariance
// evaluation at arbitrary surface points.
Eigen::VectorXd chebyshev_covariance_against(const GalerkinOperator& op,
                                             const ChebyshevSeries& series,
                                             const Eigen::VectorXd& phi0,
                                             const Eigen::MatrixXd& targets);

// P(S) x by the Chebyshev recurrence; building block shared by the sampler
// and the covariance evaluator, exposed for verification against dense
// polynomial evaluation.
Eigen::VectorXd apply_cheb_poly(const GalerkinOperator& op, const ChebyshevSeries& series,
                                const Eigen::VectorXd& x);

}  // namespace grf

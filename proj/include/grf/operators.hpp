// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <memory>
#include <utility>

#include "grf/fem.hpp"

namespace grf {

enum class MassMode { Cholesky, Lumped };

struct FactorizeOptions {
    MassMode mode = MassMode::Cholesky;
    // Natural vertex order by default for bit-reproducible factors; AMD
    // ordering is an opt-in for large meshes.
    bool fill_reducing = false;
    // Controls for the power-iteration witness of lambda_max(C^-1) and the
    // inflation applied to the certified lambda_max bound.
    double power_tol = 1e-6;
    int power_max_iters = 10000;
    double safety_factor = 1.01;
};

// Bundles a square root of the mass matrix (sparse Cholesky factor, or the
// diagonal root of the lumped mass), the stiffness matrix R, and a
// certified upper bound on the spectrum of S = (sqrtC)^-1 R (sqrtC)^-T.
// Immutable after factorize(); all applies and solves are const and safe
// to call concurrently.
class GalerkinOperator {
public:
    // mass must be SPD (Cholesky mode; breakdown reports the pivot index)
    // or positive diagonal (lumped mode). The lambda_max bound is computed
    // here as Gershgorin on R times a certified bound on the largest
    // eigenvalue of C^-1, inflated by the safety factor. Diagonal masses
    // use 1/min_i C_ii exactly; a non-diagonal mass must be an assembled
    // hat-basis mass matrix, for which lambda_max(C^-1) <= 4/min row sum.
    // A power iteration through the factorization additionally witnesses
    // lambda_max(C^-1) from below; a witness above the certified bound
    // means the mass lacks that structure and factorize throws.
    static GalerkinOperator factorize(const SparseSymMatrix& mass,
                                      const SparseSymMatrix& stiffness,
                                      const FactorizeOptions& options = {});

    int n() const;
    MassMode mode() const;
    double lambda_max() const;
    bool power_iteration_converged() const;
    const Eigen::SparseMatrix<double>& stiffness() const;

    // S x via backward solve, sparse multiply, forward solve.
    Eigen::VectorXd apply_S(const Eigen::VectorXd& x) const;

    // y with (sqrtC)^T y = x (backward substitution).
    Eigen::VectorXd solve_sqrtC_T(const Eigen::VectorXd& x) const;
    // y with (sqrtC) y = x (forward substitution).
    Eigen::VectorXd solve_sqrtC(const Eigen::VectorXd& x) const;
    // (sqrtC) x and (sqrtC)^T x.
    Eigen::VectorXd apply_sqrtC(const Eigen::VectorXd& x) const;
    Eigen::VectorXd apply_sqrtC_T(const Eigen::VectorXd& x) const;
    // C^-1 x through the factorization.
    Eigen::VectorXd solve_mass(const Eigen::VectorXd& x) const;

    // Explicitly formed dense S; small-n oracle, cap guarded.
    Eigen::MatrixXd dense_S(int cap = 3000) const;

    // Dense symmetric eigendecomposition of S: eigenvalues ascending with
    // orthonormal eigenvectors as columns. Small-n oracle, cap guarded.
    std::pair<Eigen::VectorXd, Eigen::MatrixXd> dense_eigs(int cap = 3000) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// Certified upper bound on the eigenvalues of S for the pair (C, R);
// convenience wrapper around factorize for verification runs.
double lambda_max_bound(const SparseSymMatrix& mass, const SparseSymMatrix& stiffness,
                        const FactorizeOptions& options = {});

}  // namespace grf

// SPDX-License-Identifier: MIT
#include "grf/operators.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace grf {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using NaturalLLT = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>>;
using AmdLLT = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

// Largest Gershgorin disc edge of a symmetric matrix: max_i sum_j |A_ij|.
double gershgorin_max(const SpMat& a) {
    Eigen::VectorXd row_abs_sum = Eigen::VectorXd::Zero(a.rows());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) row_abs_sum[it.row()] += std::fabs(it.value());
    return row_abs_sum.maxCoeff();
}

}  // namespace

struct GalerkinOperator::Impl {
    MassMode mode = MassMode::Cholesky;
    int n = 0;
    SpMat stiffness;
    double lambda_max = 0.0;
    bool power_converged = false;

    // Cholesky mode: C = P^T L L^T P with P from the chosen ordering.
    std::unique_ptr<NaturalLLT> natural;
    std::unique_ptr<AmdLLT> amd;
    // Lumped mode: sqrtC is this diagonal.
    Eigen::VectorXd diag_root;

    Eigen::VectorXd solve_sqrtC(const Eigen::VectorXd& x) const {
        if (mode == MassMode::Lumped) return x.cwiseQuotient(diag_root);
        if (natural) {
            Eigen::VectorXd y = x;
            natural->matrixL().solveInPlace(y);
            return y;
        }
        Eigen::VectorXd y = amd->permutationP() * x;
        amd->matrixL().solveInPlace(y);
        return y;
    }

    Eigen::VectorXd solve_sqrtC_T(const Eigen::VectorXd& x) const {
        if (mode == MassMode::Lumped) return x.cwiseQuotient(diag_root);
        if (natural) {
            Eigen::VectorXd y = x;
            natural->matrixU().solveInPlace(y);
            return y;
        }
        Eigen::VectorXd y = x;
        amd->matrixU().solveInPlace(y);
        return amd->permutationPinv() * y;
    }

    Eigen::VectorXd apply_sqrtC(const Eigen::VectorXd& x) const {
        if (mode == MassMode::Lumped) return x.cwiseProduct(diag_root);
        if (natural) return natural->matrixL() * x;
        return amd->permutationPinv() * (amd->matrixL() * x).eval();
    }

    Eigen::VectorXd apply_sqrtC_T(const Eigen::VectorXd& x) const {
        if (mode == MassMode::Lumped) return x.cwiseProduct(diag_root);
        if (natural) return natural->matrixU() * x;
        return amd->matrixU() * (amd->permutationP() * x).eval();
    }

    // W x with W = (sqrtC)^-1, applied to dense columns for dense_S.
    Eigen::MatrixXd solve_sqrtC_block(Eigen::MatrixXd x) const {
        if (mode == MassMode::Lumped) return diag_root.cwiseInverse().asDiagonal() * x;
        if (natural) {
            natural->matrixL().solveInPlace(x);
            return x;
        }
        Eigen::MatrixXd y = amd->permutationP() * x;
        amd->matrixL().solveInPlace(y);
        return y;
    }
};

GalerkinOperator GalerkinOperator::factorize(const SparseSymMatrix& mass,
                                             const SparseSymMatrix& stiffness,
                                             const FactorizeOptions& options) {
    if (mass.n() != stiffness.n())
        throw std::invalid_argument("factorize: mass and stiffness dimensions differ");
    auto impl = std::make_shared<Impl>();
    impl->mode = options.mode;
    impl->n = mass.n();
    impl->stiffness = stiffness.m;

    if (options.mode == MassMode::Lumped) {
        for (int k = 0; k < mass.m.outerSize(); ++k)
            for (SpMat::InnerIterator it(mass.m, k); it; ++it)
                if (it.row() != it.col() && it.value() != 0.0)
                    throw std::invalid_argument("factorize: lumped mode expects a diagonal matrix");
        Eigen::VectorXd diag = mass.m.diagonal();
        for (int i = 0; i < impl->n; ++i)
            if (!(diag[i] > 0.0))
                throw std::runtime_error("factorize: lumped mass has nonpositive entry at " +
                                         std::to_string(i));
        impl->diag_root = diag.cwiseSqrt();
    } else if (options.fill_reducing) {
        impl->amd = std::make_unique<AmdLLT>();
        impl->amd->compute(mass.m);
        if (impl->amd->info() != Eigen::Success)
            throw std::runtime_error("factorize: Cholesky breakdown, mass matrix not SPD");
    } else {
        impl->natural = std::make_unique<NaturalLLT>();
        impl->natural->compute(mass.m);
        if (impl->natural->info() != Eigen::Success) {
            // rerun as LDLT to locate the offending pivot for the report
            Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt(mass.m);
            int pivot = -1;
            const Eigen::VectorXd d = ldlt.vectorD();
            for (int i = 0; i < d.size(); ++i)
                if (!(d[i] > 0.0)) {
                    pivot = i;
                    break;
                }
            throw std::runtime_error("factorize: Cholesky breakdown at pivot " +
                                     std::to_string(pivot) + ", mass matrix not SPD");
        }
    }

    // lambda_max(S) <= lambda_max(R) * lambda_max(C^-1). Gershgorin bounds
    // the stiffness factor from above. The mass factor needs a certified
    // upper bound too: for a diagonal mass it is 1/min_i C_ii exactly, and
    // an assembled hat-basis mass satisfies C >= diag(rowsum(C))/4 (each
    // triangle contributes A/12 (I + ones ones^T) >= A/12 I, and the row
    // sums of C reproduce the one-ring area thirds), so
    // lambda_max(C^-1) <= 4/min_i rowsum_i(C).
    const double r_bound = gershgorin_max(stiffness.m);
    bool diagonal = impl->mode == MassMode::Lumped;
    if (!diagonal) {
        diagonal = true;
        for (int k = 0; k < mass.m.outerSize() && diagonal; ++k)
            for (SpMat::InnerIterator it(mass.m, k); it; ++it)
                if (it.row() != it.col() && it.value() != 0.0) {
                    diagonal = false;
                    break;
                }
    }
    double cinv_bound;
    if (diagonal) {
        cinv_bound = 1.0 / mass.m.diagonal().minCoeff();
    } else {
        const Eigen::VectorXd row_sum = mass.m * Eigen::VectorXd::Ones(impl->n);
        const double rmin = row_sum.minCoeff();
        if (!(rmin > 0.0))
            throw std::runtime_error(
                "factorize: mass matrix has a nonpositive row sum; no certified "
                "lambda_max bound");
        cinv_bound = 4.0 / rmin;
    }

    // Power iteration through the factorization approaches lambda_max(C^-1)
    // from below. It cannot certify the bound, but it witnesses how much
    // slack the algebraic factor carries and flags assembly bugs. The start
    // vector avoids mesh symmetries (the ones vector is an eigenvector of C
    // on uniform meshes and stalls the iteration on the wrong eigenvalue).
    Eigen::VectorXd x(impl->n);
    for (int i = 0; i < impl->n; ++i) x[i] = 1.0 + 0.5 * std::sin(2.6180339887498949 * i);
    x.normalize();
    double estimate = 0.0, previous = 0.0;
    bool converged = false;
    for (int iter = 1; iter <= options.power_max_iters; ++iter) {
        Eigen::VectorXd y = impl->mode == MassMode::Lumped
                                ? Eigen::VectorXd(x.cwiseQuotient(impl->diag_root.cwiseAbs2()))
                                : impl->solve_sqrtC_T(impl->solve_sqrtC(x));
        estimate = x.dot(y);  // Rayleigh quotient of C^-1 at unit x
        const double ynorm = y.norm();
        if (!(ynorm > 0.0)) break;
        x = y / ynorm;
        if (iter > 1 && std::fabs(estimate - previous) < options.power_tol * std::fabs(estimate)) {
            converged = true;
            break;
        }
        previous = estimate;
    }
    impl->power_converged = converged;
    if (converged && estimate > cinv_bound * (1.0 + 1e-6))
        throw std::runtime_error(
            "factorize: mass spectrum witness exceeds its certified bound; the mass "
            "matrix does not have the assembled hat-basis structure");
    if (!converged)
        std::cerr << "[grf] warning: power iteration did not settle after "
                  << options.power_max_iters << " iterations; the certified bound stands\n";
    impl->lambda_max = r_bound * cinv_bound * options.safety_factor;

    GalerkinOperator op;
    op.impl_ = std::move(impl);
    return op;
}

int GalerkinOperator::n() const { return impl_->n; }
MassMode GalerkinOperator::mode() const { return impl_->mode; }
double GalerkinOperator::lambda_max() const { return impl_->lambda_max; }
bool GalerkinOperator::power_iteration_converged() const { return impl_->power_converged; }
const Eigen::SparseMatrix<double>& GalerkinOperator::stiffness() const { return impl_->stiffness; }

Eigen::VectorXd GalerkinOperator::apply_S(const Eigen::VectorXd& x) const {
    if (x.size() != impl_->n) throw std::invalid_argument("apply_S: dimension mismatch");
    Eigen::VectorXd u = impl_->solve_sqrtC_T(x);
    u = impl_->stiffness * u;
    return impl_->solve_sqrtC(u);
}

Eigen::VectorXd GalerkinOperator::solve_sqrtC_T(const Eigen::VectorXd& x) const {
    if (x.size() != impl_->n) throw std::invalid_argument("solve_sqrtC_T: dimension mismatch");
    return impl_->solve_sqrtC_T(x);
}

Eigen::VectorXd GalerkinOperator::solve_sqrtC(const Eigen::VectorXd& x) const {
    if (x.size() != impl_->n) throw std::invalid_argument("solve_sqrtC: dimension mismatch");
    return impl_->solve_sqrtC(x);
}

Eigen::VectorXd GalerkinOperator::apply_sqrtC(const Eigen::VectorXd& x) const {
    if (x.size() != impl_->n) throw std::invalid_argument("apply_sqrtC: dimension mismatch");
    return impl_->apply_sqrtC(x);
}

Eigen::VectorXd GalerkinOperator::apply_sqrtC_T(const Eigen::VectorXd& x) const {
    if (x.size() != impl_->n) throw std::invalid_argument("apply_sqrtC_T: dimension mismatch");
    return impl_->apply_sqrtC_T(x);
}

Eigen::VectorXd GalerkinOperator::solve_mass(const Eigen::VectorXd& x) const {
    if (x.size() != impl_->n) throw std::invalid_argument("solve_mass: dimension mismatch");
    if (impl_->mode == MassMode::Lumped) return x.cwiseQuotient(impl_->diag_root.cwiseAbs2());
    return impl_->solve_sqrtC_T(impl_->solve_sqrtC(x));
}

Eigen::MatrixXd GalerkinOperator::dense_S(int cap) const {
    if (impl_->n > cap)
        throw std::invalid_argument("dense_S: dimension " + std::to_string(impl_->n) +
                                    " exceeds cap " + std::to_string(cap));
    // S = W R W^T with W = (sqrtC)^-1
    Eigen::MatrixXd x = impl_->solve_sqrtC_block(Eigen::MatrixXd(impl_->stiffness));
    Eigen::MatrixXd s = impl_->solve_sqrtC_block(x.transpose());
    return 0.5 * (s + s.transpose());  // symmetrize away solve roundoff
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> GalerkinOperator::dense_eigs(int cap) const {
    const Eigen::MatrixXd s = dense_S(cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dense_eigs: eigendecomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double lambda_max_bound(const SparseSymMatrix& mass, const SparseSymMatrix& stiffness,
                        const FactorizeOptions& options) {
    return GalerkinOperator::factorize(mass, stiffness, options).lambda_max();
}

}  // namespace grf

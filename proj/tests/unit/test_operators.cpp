// SPDX-License-Identifier: MIT
//
// Tests for the factorized Galerkin operator: the certified lambda_max
// bound, the sparse applies and solves against dense linear algebra, the
// generalized eigenvalue oracle, and the lumped-mass mode.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "grf/fem.hpp"
#include "grf/mesh.hpp"
#include "grf/operators.hpp"
#include "grf/psd.hpp"
#include "grf/sampler.hpp"

using doctest::Approx;

namespace {

grf::SparseSymMatrix sparse_from_dense(const Eigen::MatrixXd& dense) {
    grf::SparseSymMatrix out;
    out.m = dense.sparseView();
    out.m.makeCompressed();
    return out;
}

grf::SparseSymMatrix sparse_identity(int n) {
    Eigen::SparseMatrix<double> m(n, n);
    m.setIdentity();
    grf::SparseSymMatrix out;
    out.m = std::move(m);
    return out;
}

// Eigenvalues of the pencil R v = lambda C v, ascending; the reference for
// the spectrum of S because S is similar to the pencil.
Eigen::VectorXd pencil_eigenvalues(const grf::SparseSymMatrix& mass,
                                   const grf::SparseSymMatrix& stiffness) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        Eigen::MatrixXd(stiffness.m), Eigen::MatrixXd(mass.m));
    REQUIRE(solver.info() == Eigen::Success);
    return solver.eigenvalues();
}

}  // namespace

TEST_CASE("identity mass with diagonal stiffness gives the hand-computed bound") {
    const auto mass = sparse_identity(2);
    const auto stiffness = sparse_from_dense(Eigen::Vector2d(2.0, 5.0).asDiagonal());
    const auto op = grf::GalerkinOperator::factorize(mass, stiffness);

    // Gershgorin on R is 5, the diagonal mass gives the exact factor
    // 1/min_i C_ii = 1, and the default safety factor is 1.01.
    CHECK(op.lambda_max() == Approx(5.05).epsilon(1e-12));
    CHECK(op.power_iteration_converged());
    CHECK(op.n() == 2);
    CHECK(op.mode() == grf::MassMode::Cholesky);

    // With C = I the operator S is the stiffness itself.
    const Eigen::Vector2d x(1.0, -3.0);
    const Eigen::VectorXd y = op.apply_S(x);
    CHECK(y[0] == Approx(2.0));
    CHECK(y[1] == Approx(-15.0));

    const auto [values, vectors] = op.dense_eigs();
    CHECK(values[0] == Approx(2.0).epsilon(1e-13));
    CHECK(values[1] == Approx(5.0).epsilon(1e-13));
    CHECK((vectors.transpose() * vectors - Eigen::Matrix2d::Identity()).norm() < 1e-13);

    CHECK(grf::lambda_max_bound(mass, stiffness) == Approx(op.lambda_max()).epsilon(1e-15));
}

TEST_CASE("apply_S matches the dense operator on a refined sphere") {
    const auto mesh = grf::icosphere(1);
    const auto mass = grf::assemble_mass(mesh);
    const auto stiffness = grf::assemble_stiffness(mesh);
    const auto op = grf::GalerkinOperator::factorize(mass, stiffness);

    const Eigen::MatrixXd dense = op.dense_S();
    CHECK(dense.rows() == mesh.n_vertices());
    CHECK((dense - dense.transpose()).norm() < 1e-12 * dense.norm());

    Eigen::VectorXd x(op.n());
    for (int i = 0; i < op.n(); ++i) x[i] = std::sin(0.7 * i) + 0.2 * i;
    const Eigen::VectorXd via_solves = op.apply_S(x);
    const Eigen::VectorXd via_dense = dense * x;
    CHECK((via_solves - via_dense).norm() < 1e-11 * via_dense.norm());
}

TEST_CASE("dense_eigs reproduces the generalized eigenvalue problem") {
    for (const auto& mesh : {grf::icosphere(0), grf::hyperboloid(0)}) {
        const auto mass = grf::assemble_mass(mesh);
        const auto stiffness = grf::assemble_stiffness(mesh);
        const auto op = grf::GalerkinOperator::factorize(mass, stiffness);

        const Eigen::VectorXd reference = pencil_eigenvalues(mass, stiffness);
        const auto [values, vectors] = op.dense_eigs();
        REQUIRE(values.size() == reference.size());
        const double scale = reference[reference.size() - 1];
        for (int i = 0; i < values.size(); ++i)
            CHECK(values[i] == Approx(reference[i]).epsilon(1e-10).scale(scale));

        // Ascending order, orthonormal eigenvectors, small residual.
        for (int i = 0; i + 1 < values.size(); ++i) CHECK(values[i] <= values[i + 1]);
        const int n = op.n();
        CHECK((vectors.transpose() * vectors - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-11);
        const Eigen::MatrixXd residual =
            op.dense_S() * vectors - vectors * values.asDiagonal();
        CHECK(residual.norm() < 1e-10 * scale);
    }
}

TEST_CASE("lambda_max bound certifies the dense spectrum") {
    const std::vector<grf::TriangleMesh> meshes = {grf::icosphere(0), grf::icosphere(1),
                                                   grf::icosphere(2), grf::hyperboloid(0)};
    for (const auto& mesh : meshes) {
        const auto mass = grf::assemble_mass(mesh);
        const auto stiffness = grf::assemble_stiffness(mesh);
        for (const auto mode : {grf::MassMode::Cholesky, grf::MassMode::Lumped}) {
            grf::FactorizeOptions options;
            options.mode = mode;
            const auto& factor_mass = mode == grf::MassMode::Lumped
                                          ? grf::lumped_mass(mesh)
                                          : mass;
            const auto op = grf::GalerkinOperator::factorize(factor_mass, stiffness, options);
            CHECK(op.power_iteration_converged());
            const auto [values, vectors] = op.dense_eigs();
            CHECK(op.lambda_max() >= values[values.size() - 1]);
            // The bound is a product of two sharp one-sided estimates; it
            // should stay within a small factor of the true spectrum.
            CHECK(op.lambda_max() < 30.0 * values[values.size() - 1]);
        }
    }
}

TEST_CASE("constants lie in the kernel of S") {
    const auto mesh = grf::icosphere(2);
    const auto op = grf::GalerkinOperator::factorize(grf::assemble_mass(mesh),
                                                     grf::assemble_stiffness(mesh));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.n());
    // S (sqrtC)^T 1 = (sqrtC)^-1 R 1 = 0 because stiffness rows sum to zero.
    const Eigen::VectorXd image = op.apply_S(op.apply_sqrtC_T(ones));
    CHECK(image.norm() < 1e-10 * op.lambda_max() * std::sqrt(double(op.n())));
}

TEST_CASE("solves invert the applies and recompose the mass matrix") {
    const auto mesh = grf::hyperboloid(1);
    const auto mass = grf::assemble_mass(mesh);
    const auto op = grf::GalerkinOperator::factorize(mass, grf::assemble_stiffness(mesh));

    Eigen::VectorXd x(op.n());
    for (int i = 0; i < op.n(); ++i) x[i] = std::cos(1.3 * i) - 0.5;

    CHECK((op.solve_sqrtC(op.apply_sqrtC(x)) - x).norm() < 1e-12 * x.norm());
    CHECK((op.apply_sqrtC(op.solve_sqrtC(x)) - x).norm() < 1e-12 * x.norm());
    CHECK((op.solve_sqrtC_T(op.apply_sqrtC_T(x)) - x).norm() < 1e-12 * x.norm());
    CHECK((op.apply_sqrtC_T(op.solve_sqrtC_T(x)) - x).norm() < 1e-12 * x.norm());

    // sqrtC (sqrtC)^T = C and solve_mass applies C^-1.
    const Eigen::VectorXd cx = mass.m * x;
    CHECK((op.apply_sqrtC(op.apply_sqrtC_T(x)) - cx).norm() < 1e-12 * cx.norm());
    CHECK((op.solve_mass(cx) - x).norm() < 1e-10 * x.norm());
}

TEST_CASE("lumped mode takes the entrywise square root of the diagonal") {
    const auto mesh = grf::icosphere(1);
    const auto lumped = grf::lumped_mass(mesh);
    grf::FactorizeOptions options;
    options.mode = grf::MassMode::Lumped;
    const auto op = grf::GalerkinOperator::factorize(lumped, grf::assemble_stiffness(mesh),
                                                     options);
    CHECK(op.mode() == grf::MassMode::Lumped);

    const Eigen::VectorXd root = Eigen::VectorXd(lumped.m.diagonal()).cwiseSqrt();
    Eigen::VectorXd x(op.n());
    for (int i = 0; i < op.n(); ++i) x[i] = 1.0 + 0.01 * i;
    CHECK((op.apply_sqrtC(x) - root.cwiseProduct(x)).norm() == 0.0);
    CHECK((op.apply_sqrtC_T(x) - root.cwiseProduct(x)).norm() == 0.0);
    CHECK((op.solve_sqrtC(x) - x.cwiseQuotient(root)).norm() == 0.0);
    CHECK((op.solve_mass(x) - x.cwiseQuotient(root.cwiseAbs2())).norm() < 1e-15);
}

TEST_CASE("lumped mode rejects matrices with off-diagonal entries") {
    const auto mesh = grf::icosphere(0);
    grf::FactorizeOptions options;
    options.mode = grf::MassMode::Lumped;
    CHECK_THROWS_WITH_AS(grf::GalerkinOperator::factorize(grf::assemble_mass(mesh),
                                                          grf::assemble_stiffness(mesh), options),
                         doctest::Contains("lumped mode expects a diagonal matrix"),
                         std::invalid_argument);

    Eigen::MatrixXd bad = Eigen::Vector3d(1.0, 0.0, 2.0).asDiagonal();
    CHECK_THROWS_WITH_AS(
        grf::GalerkinOperator::factorize(sparse_from_dense(bad),
                                         sparse_identity(3), options),
        doctest::Contains("nonpositive entry at 1"), std::runtime_error);
}

TEST_CASE("fill-reducing ordering preserves the operator invariants") {
    // The AMD factor is a different square root of C than the natural one,
    // so S itself changes by an orthogonal similarity. Everything the
    // library consumes is invariant: the spectrum, C^-1, the mass
    // recomposition, and the weight covariance.
    const auto mesh = grf::icosphere(1);
    const auto mass = grf::assemble_mass(mesh);
    const auto stiffness = grf::assemble_stiffness(mesh);
    const auto natural = grf::GalerkinOperator::factorize(mass, stiffness);
    grf::FactorizeOptions options;
    options.fill_reducing = true;
    const auto amd = grf::GalerkinOperator::factorize(mass, stiffness, options);

    CHECK(amd.lambda_max() == Approx(natural.lambda_max()).epsilon(1e-12));

    const Eigen::VectorXd values_natural = natural.dense_eigs().first;
    const Eigen::VectorXd values_amd = amd.dense_eigs().first;
    REQUIRE(values_amd.size() == values_natural.size());
    const double scale = values_natural[values_natural.size() - 1];
    for (int i = 0; i < values_natural.size(); ++i)
        CHECK(values_amd[i] == Approx(values_natural[i]).epsilon(1e-10).scale(scale));

    Eigen::VectorXd x(natural.n());
    for (int i = 0; i < natural.n(); ++i) x[i] = std::sin(2.1 * i);
    CHECK((natural.solve_mass(x) - amd.solve_mass(x)).norm() <
          1e-11 * natural.solve_mass(x).norm());
    const Eigen::VectorXd cx = mass.m * x;
    CHECK((amd.apply_sqrtC(amd.apply_sqrtC_T(x)) - cx).norm() < 1e-12 * cx.norm());
    CHECK((amd.solve_sqrtC(amd.apply_sqrtC(x)) - x).norm() < 1e-12 * x.norm());
    CHECK((amd.solve_sqrtC_T(amd.apply_sqrtC_T(x)) - x).norm() < 1e-12 * x.norm());

    const auto psd = grf::PowerSpectralDensity::matern_from_range(1.0, 0.8);
    const Eigen::MatrixXd cov_natural = grf::exact_weight_covariance(natural, psd);
    const Eigen::MatrixXd cov_amd = grf::exact_weight_covariance(amd, psd);
    CHECK((cov_natural - cov_amd).norm() < 1e-10 * cov_natural.norm());
}

TEST_CASE("indefinite mass matrices are rejected with the pivot index") {
    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    CHECK_THROWS_WITH_AS(grf::GalerkinOperator::factorize(sparse_from_dense(indefinite),
                                                          sparse_identity(2)),
                         doctest::Contains("pivot 1"), std::runtime_error);
}

TEST_CASE("dimension mismatches are reported") {
    CHECK_THROWS_WITH_AS(grf::GalerkinOperator::factorize(sparse_identity(2), sparse_identity(3)),
                         doctest::Contains("dimensions differ"), std::invalid_argument);

    const auto op = grf::GalerkinOperator::factorize(sparse_identity(3), sparse_identity(3));
    const Eigen::VectorXd wrong = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(op.apply_S(wrong), std::invalid_argument);
    CHECK_THROWS_AS(op.solve_sqrtC(wrong), std::invalid_argument);
    CHECK_THROWS_AS(op.solve_sqrtC_T(wrong), std::invalid_argument);
    CHECK_THROWS_AS(op.apply_sqrtC(wrong), std::invalid_argument);
    CHECK_THROWS_AS(op.apply_sqrtC_T(wrong), std::invalid_argument);
    CHECK_THROWS_AS(op.solve_mass(wrong), std::invalid_argument);
}

TEST_CASE("dense oracles enforce the size cap") {
    const auto mesh = grf::icosphere(1);
    const auto op = grf::GalerkinOperator::factorize(grf::assemble_mass(mesh),
                                                     grf::assemble_stiffness(mesh));
    CHECK_THROWS_WITH_AS(op.dense_S(10), doctest::Contains("exceeds cap"), std::invalid_argument);
    CHECK_THROWS_AS(op.dense_eigs(10), std::invalid_argument);
    CHECK_NOTHROW(op.dense_S(42));
}

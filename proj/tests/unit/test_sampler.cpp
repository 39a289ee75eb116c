// SPDX-License-Identifier: MIT
//
// Tests for the Chebyshev sampler: the matrix recurrence against dense
// polynomial evaluation, exact covariance oracles, reproducible batches,
// and the statistical agreement of sampled covariances.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "grf/chebyshev.hpp"
#include "grf/fem.hpp"
#include "grf/mesh.hpp"
#include "grf/operators.hpp"
#include "grf/psd.hpp"
#include "grf/rng.hpp"
#include "grf/sampler.hpp"

using doctest::Approx;

namespace {

grf::GalerkinOperator sphere_operator(int level) {
    const auto mesh = grf::icosphere(level);
    return grf::GalerkinOperator::factorize(grf::assemble_mass(mesh),
                                            grf::assemble_stiffness(mesh));
}

// Dense reference for P(S): the same three-term recurrence run on full
// matrices, P = sum_k a_k T_k(M) with M = (2/lmax) S - I.
Eigen::MatrixXd dense_cheb_poly(const Eigen::MatrixXd& s, const std::vector<double>& coeffs,
                                double lambda_max) {
    const int n = static_cast<int>(s.rows());
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd m = (2.0 / lambda_max) * s - eye;
    Eigen::MatrixXd acc = coeffs[0] * eye;
    if (coeffs.size() == 1) return acc;
    Eigen::MatrixXd prev = eye;
    Eigen::MatrixXd curr = m;
    acc += coeffs[1] * curr;
    for (std::size_t k = 2; k < coeffs.size(); ++k) {
        Eigen::MatrixXd next = 2.0 * m * curr - prev;
        acc += coeffs[k] * next;
        prev = std::move(curr);
        curr = std::move(next);
    }
    return acc;
}

grf::PowerSpectralDensity unit_density() {
    return grf::PowerSpectralDensity::custom([](double) { return 1.0; }, 1.0, std::nullopt,
                                             std::nullopt, 1.0);
}

}  // namespace

TEST_CASE("apply_cheb_poly matches dense matrix polynomials") {
    const auto op = sphere_operator(0);
    const auto psd = grf::PowerSpectralDensity::matern(4.0, 1.0);
    const Eigen::MatrixXd s = op.dense_S();
    Eigen::VectorXd x(op.n());
    for (int i = 0; i < op.n(); ++i) x[i] = std::sin(0.9 * i + 0.2);

    for (const int order : {0, 1, 5, 10}) {
        const auto series = grf::fit_chebyshev(psd, op.lambda_max(), order);
        const Eigen::VectorXd recurrence = grf::apply_cheb_poly(op, series, x);
        const Eigen::VectorXd dense = dense_cheb_poly(s, series.coeffs, series.lambda_max) * x;
        CHECK((recurrence - dense).norm() < 1e-12 * x.norm());
    }
}

TEST_CASE("unit density with identity mass returns the white-noise vector") {
    grf::SparseSymMatrix mass;
    mass.m = Eigen::SparseMatrix<double>(3, 3);
    mass.m.setIdentity();
    grf::SparseSymMatrix stiffness;
    stiffness.m = Eigen::MatrixXd(Eigen::Vector3d(0.5, 1.0, 2.0).asDiagonal()).sparseView();
    const auto op = grf::GalerkinOperator::factorize(mass, stiffness);

    // P identically one: X = W and Z = (sqrtC)^-T W = W.
    grf::ChebyshevSeries series;
    series.coeffs = {1.0};
    series.lambda_max = op.lambda_max();

    const std::uint64_t seed = 7, index = 3;
    const grf::FieldSample sample = grf::sample_indexed(op, series, seed, index);
    CHECK(sample.seed == seed);
    CHECK(sample.sample_index == index);
    CHECK(sample.cheb_order == 0);
    CHECK(sample.lambda_max == op.lambda_max());

    grf::NormalStream rng(seed, index);
    Eigen::Vector3d w;
    rng.fill(w.data(), 3);
    CHECK((sample.weights - w).norm() == 0.0);
}

TEST_CASE("unit density weight covariance is the inverse mass matrix") {
    const auto mesh = grf::icosphere(1);
    const auto mass = grf::assemble_mass(mesh);
    const auto op = grf::GalerkinOperator::factorize(mass, grf::assemble_stiffness(mesh));

    const Eigen::MatrixXd cov = grf::exact_weight_covariance(op, unit_density());
    const Eigen::MatrixXd c_inv =
        Eigen::MatrixXd(mass.m).llt().solve(Eigen::MatrixXd::Identity(op.n(), op.n()));
    CHECK((cov - c_inv).cwiseAbs().maxCoeff() < 1e-9 * c_inv.cwiseAbs().maxCoeff());

    // Covariances are symmetric positive semidefinite.
    CHECK((cov - cov.transpose()).norm() < 1e-12 * cov.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(cov);
    CHECK(eigs.eigenvalues().minCoeff() > -1e-10 * eigs.eigenvalues().maxCoeff());
}

TEST_CASE("polynomial covariance route matches the eigendecomposition route") {
    const auto mesh = grf::icosphere(1);
    const auto op = grf::GalerkinOperator::factorize(grf::assemble_mass(mesh),
                                                     grf::assemble_stiffness(mesh));
    const auto psd = grf::PowerSpectralDensity::matern_from_range(1.0, M_PI / 6.0);
    const auto selection = grf::select_order(psd, op.lambda_max());
    REQUIRE_FALSE(selection.hit_cap);
    const auto series = grf::fit_chebyshev(psd, op.lambda_max(), selection.order);

    const Eigen::MatrixXd exact = grf::exact_weight_covariance(op, psd);
    const double scale = exact.cwiseAbs().maxCoeff();

    // Against every basis vector: full covariance column via the
    // polynomial recurrence, no eigendecomposition involved.
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(op.n(), op.n());
    for (const int i : {0, 5, 23, 41}) {
        const Eigen::VectorXd column = grf::chebyshev_covariance_against(op, series, eye.col(i),
                                                                         eye);
        CHECK((column - exact.col(i)).cwiseAbs().maxCoeff() < 1e-8 * scale);
    }

    // Interpolated points off the vertex set follow the same identity:
    // cov(x0, y) = phi0^T Sigma phi_y.
    const auto p0 = grf::locate_along_ray(mesh, {0.3, 0.2, 0.93});
    const auto p1 = grf::locate_along_ray(mesh, {-0.5, 0.1, 0.86});
    Eigen::VectorXd phi0 = Eigen::VectorXd::Zero(op.n());
    Eigen::VectorXd phi1 = Eigen::VectorXd::Zero(op.n());
    for (int k = 0; k < 3; ++k) {
        phi0[p0.vertex[k]] += p0.weight[k];
        phi1[p1.vertex[k]] += p1.weight[k];
    }
    const Eigen::VectorXd cov01 = grf::chebyshev_covariance_against(op, series, phi0, phi1);
    CHECK(cov01[0] == Approx(phi0.dot(exact * phi1)).epsilon(1e-8));

    // Vertex-pair helper agrees with the dense matrix entries.
    const std::vector<std::pair<int, int>> pairs = {{0, 0}, {3, 17}, {41, 2}};
    const std::vector<double> at = grf::galerkin_covariance_at(op, psd, pairs);
    REQUIRE(at.size() == pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k)
        CHECK(at[k] == Approx(exact(pairs[k].first, pairs[k].second)).epsilon(1e-12));
}

TEST_CASE("batches are identical for any worker count") {
    const auto op = sphere_operator(0);
    const auto psd = grf::PowerSpectralDensity::matern(9.0, 1.0);
    const auto series = grf::fit_chebyshev(psd, op.lambda_max(),
                                           grf::select_order(psd, op.lambda_max()).order);

    const long count = 9;
    const auto batch1 = grf::sample_batch(op, series, count, 42, 1);
    const auto batch4 = grf::sample_batch(op, series, count, 42, 4);
    const auto batch8 = grf::sample_batch(op, series, count, 42, 8);
    REQUIRE(batch1.size() == count);
    for (long i = 0; i < count; ++i) {
        CHECK(batch1[i].sample_index == static_cast<std::uint64_t>(i));
        CHECK((batch1[i].weights - batch4[i].weights).norm() == 0.0);
        CHECK((batch1[i].weights - batch8[i].weights).norm() == 0.0);
        const auto direct = grf::sample_indexed(op, series, 42, i);
        CHECK((batch1[i].weights - direct.weights).norm() == 0.0);
    }

    // Distinct seeds and distinct indices give distinct draws.
    const auto other = grf::sample_batch(op, series, count, 43, 1);
    CHECK((batch1[0].weights - other[0].weights).norm() > 0.0);
    CHECK((batch1[0].weights - batch1[1].weights).norm() > 0.0);
}

TEST_CASE("series fitted to a different spectral interval are rejected") {
    const auto op = sphere_operator(0);
    const auto psd = grf::PowerSpectralDensity::matern(4.0, 1.0);
    auto series = grf::fit_chebyshev(psd, op.lambda_max(), 8);
    series.lambda_max *= 1.5;
    CHECK_THROWS_WITH_AS(grf::sample_indexed(op, series, 1, 0),
                         doctest::Contains("lambda_max"), std::invalid_argument);
    CHECK_THROWS_AS(grf::apply_cheb_poly(op, series, Eigen::VectorXd::Zero(op.n())),
                    std::invalid_argument);

    grf::ChebyshevSeries empty;
    empty.lambda_max = op.lambda_max();
    CHECK_THROWS_WITH_AS(grf::sample_indexed(op, empty, 1, 0), doctest::Contains("empty"),
                         std::invalid_argument);

    const auto good = grf::fit_chebyshev(psd, op.lambda_max(), 8);
    CHECK_THROWS_AS(grf::apply_cheb_poly(op, good, Eigen::VectorXd::Zero(op.n() + 1)),
                    std::invalid_argument);
}

TEST_CASE("weight covariance is invariant under the antipodal map") {
    const auto mesh = grf::icosphere(1);

    // Midpoint subdivision and normalization commute with x -> -x, so every
    // vertex has an exact antipode in the mesh.
    std::vector<int> antipode(mesh.vertices.size(), -1);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        for (std::size_t j = 0; j < mesh.vertices.size(); ++j) {
            if (mesh.vertices[j][0] == -mesh.vertices[i][0] &&
                mesh.vertices[j][1] == -mesh.vertices[i][1] &&
                mesh.vertices[j][2] == -mesh.vertices[i][2]) {
                antipode[i] = static_cast<int>(j);
                break;
            }
        }
        REQUIRE(antipode[i] >= 0);
    }

    const auto op = grf::GalerkinOperator::factorize(grf::assemble_mass(mesh),
                                                     grf::assemble_stiffness(mesh));
    const auto psd = grf::PowerSpectralDensity::matern(4.0, 1.0);
    const Eigen::MatrixXd cov = grf::exact_weight_covariance(op, psd);
    const double scale = cov.cwiseAbs().maxCoeff();
    for (int i = 0; i < op.n(); ++i)
        for (int j = 0; j < op.n(); ++j)
            CHECK(std::fabs(cov(i, j) - cov(antipode[i], antipode[j])) < 1e-9 * scale);
}

TEST_CASE("sample covariance converges to the exact covariance") {
    const auto op = sphere_operator(0);
    const auto psd = grf::PowerSpectralDensity::matern(4.0, 1.0);
    const auto series = grf::fit_chebyshev(psd, op.lambda_max(),
                                           grf::select_order(psd, op.lambda_max()).order);
    const Eigen::MatrixXd exact = grf::exact_weight_covariance(op, psd);

    const long n_samples = 20000;
    const auto batch = grf::sample_batch(op, series, n_samples, 11, 4);
    Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(op.n(), op.n());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(op.n());
    for (const auto& sample : batch) {
        moment.noalias() += sample.weights * sample.weights.transpose();
        mean += sample.weights;
    }
    moment /= double(n_samples);
    mean /= double(n_samples);

    // Entrywise five-sigma band around the exact covariance; the variance
    // of an empirical Gaussian covariance entry is (S_ii S_jj + S_ij^2)/N.
    for (int i = 0; i < op.n(); ++i) {
        for (int j = 0; j <= i; ++j) {
            const double sigma = std::sqrt(
                (exact(i, i) * exact(j, j) + exact(i, j) * exact(i, j)) / double(n_samples));
            CHECK(std::fabs(moment(i, j) - exact(i, j)) <= 5.0 * sigma);
        }
        CHECK(std::fabs(mean[i]) <= 5.0 * std::sqrt(exact(i, i) / double(n_samples)));
    }
}

// SPDX-License-Identifier: MIT
#include "grf/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace grf {

namespace {

void check_compatible(const GalerkinOperator& op, const ChebyshevSeries& series) {
    if (series.coeffs.empty()) throw std::invalid_argument("sampler: empty Chebyshev series");
    if (series.lambda_max != op.lambda_max())
        throw std::invalid_argument(
            "sampler: series lambda_max does not match the operator (refusing to refit)");
}

}  // namespace

Eigen::VectorXd apply_cheb_poly(const GalerkinOperator& op, const ChebyshevSeries& series,
                                const Eigen::VectorXd& x) {
    check_compatible(op, series);
    if (x.size() != op.n()) throw std::invalid_argument("apply_cheb_poly: dimension mismatch");
    const auto& a = series.coeffs;
    const double lmax = series.lambda_max;
    const int order = series.order();

    // T_0(M) x = x, T_1(M) x = M x, T_{k+1}(M) x = 2 M T_k(M) x - T_{k-1}(M) x
    // with M = (2/lmax) S - I, so M v = (2/lmax) apply_S(v) - v.
    Eigen::VectorXd acc = a[0] * x;
    if (order == 0) return acc;
    Eigen::VectorXd prev = x;                                  // T_0 x
    Eigen::VectorXd curr = (2.0 / lmax) * op.apply_S(x) - x;   // T_1 x
    acc += a[1] * curr;
    for (int k = 2; k <= order; ++k) {
        Eigen::VectorXd next = (4.0 / lmax) * op.apply_S(curr) - 2.0 * curr - prev;
        acc += a[k] * next;
        prev = std::move(curr);
        curr = std::move(next);
    }
    return acc;
}

FieldSample sample_weights(const GalerkinOperator& op, const ChebyshevSeries& series,
                           NormalStream& rng) {
    check_compatible(op, series);
    Eigen::VectorXd w(op.n());
    rng.fill(w.data(), op.n());
    FieldSample sample;
    sample.weights = op.solve_sqrtC_T(apply_cheb_poly(op, series, w));
    sample.cheb_order = series.order();
    sample.lambda_max = series.lambda_max;
    return sample;
}

FieldSample sample_indexed(const GalerkinOperator& op, const ChebyshevSeries& series,
                           std::uint64_t base_seed, std::uint64_t sample_index) {
    NormalStream rng(base_seed, sample_index);
    FieldSample sample = sample_weights(op, series, rng);
    sample.seed = base_seed;
    sample.sample_index = sample_index;
    return sample;
}

std::vector<FieldSample> sample_batch(const GalerkinOperator& op, const ChebyshevSeries& series,
                                      long count, std::uint64_t base_seed, int worker_count) {
    if (count < 1) throw std::invalid_argument("sample_batch: count must be at least 1");
    if (worker_count < 1) worker_count = 1;
    check_compatible(op, series);

    std::vector<FieldSample> samples(count);
    if (worker_count == 1) {
        for (long i = 0; i < count; ++i)
            samples[i] = sample_indexed(op, series, base_seed, static_cast<std::uint64_t>(i));
        return samples;
    }
    // Static striping over samples: slot i depends only on (base_seed, i),
    // so the batch content is independent of the worker count.
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w) {
        workers.emplace_back([&, w]() {
            for (long i = w; i < count; i += worker_count)
                samples[i] = sample_indexed(op, series, base_seed, static_cast<std::uint64_t>(i));
        });
    }
    for (auto& worker : workers) worker.join();
    return samples;
}

Eigen::MatrixXd exact_weight_covariance(const GalerkinOperator& op,
                                        const PowerSpectralDensity& psd, int dense_cap) {
    const auto [values, vectors] = op.dense_eigs(dense_cap);
    Eigen::VectorXd gamma2(values.size());
    for (int i = 0; i < values.size(); ++i) {
        // eigenvalues of a PSD pencil can round slightly negative
        const double lambda = std::max(values[i], 0.0);
        const double g = psd.eval(lambda);
        gamma2[i] = g * g;
    }
    // (sqrtC)^-T V diag(gamma^2) V^T (sqrtC)^-1, built column-block-wise
    Eigen::MatrixXd inner = vectors * gamma2.asDiagonal() * vectors.transpose();
    Eigen::MatrixXd result(op.n(), op.n());
    for (int j = 0; j < op.n(); ++j) result.col(j) = op.solve_sqrtC_T(inner.col(j));
    for (int i = 0; i < op.n(); ++i)
        result.row(i) = op.solve_sqrtC_T(result.row(i).transpose()).transpose();
    return 0.5 * (result + result.transpose());
}

std::vector<double> galerkin_covariance_at(const GalerkinOperator& op,
                                           const PowerSpectralDensity& psd,
                                           const std::vector<std::pair<int, int>>& pairs,
                                           int dense_cap) {
    const Eigen::MatrixXd cov = exact_weight_covariance(op, psd, dense_cap);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        if (i < 0 || i >= op.n() || j < 0 || j >= op.n())
            throw std::invalid_argument("galerkin_covariance_at: vertex index out of range");
        out.push_back(cov(i, j));
    }
    return out;
}

Eigen::VectorXd chebyshev_covariance_against(const GalerkinOperator& op,
                                             const ChebyshevSeries& series,
                                             const Eigen::VectorXd& phi0,
                                             const Eigen::MatrixXd& targets) {
    check_compatible(op, series);
    if (phi0.size() != op.n() || targets.rows() != op.n())
        throw std::invalid_argument("chebyshev_covariance_against: dimension mismatch");
    // cov(x0, y) = [P(S)^2 (sqrtC)^-1 phi0]^T (sqrtC)^-1 phi_y
    Eigen::VectorXd v = op.solve_sqrtC(phi0);
    v = apply_cheb_poly(op, series, v);
    v = apply_cheb_poly(op, series, v);
    const Eigen::VectorXd back = op.solve_sqrtC_T(v);  // phi_y^T (sqrtC)^-T . v
    return targets.transpose() * back;
}

}  // namespace grf

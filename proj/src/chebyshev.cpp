// SPDX-License-Identifier: MIT
#include "grf/chebyshev.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace grf {

namespace {

std::atomic<long> g_clamp_count{0};

// FFTW plan creation/destruction is not thread-safe; fits are serialized.
std::mutex g_fftw_mutex;

constexpr double kClampTol = 1e-9;

}  // namespace

long cheb_clamp_count() { return g_clamp_count.load(); }

double ChebyshevSeries::eval_scalar(double lambda) const {
    if (coeffs.empty()) throw std::logic_error("ChebyshevSeries: empty coefficient list");
    double t = 2.0 * lambda / lambda_max - 1.0;
    if (t < -1.0 || t > 1.0) {
        if (t < -1.0 - kClampTol || t > 1.0 + kClampTol)
            throw std::invalid_argument("ChebyshevSeries: lambda outside [0, lambda_max]");
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        t = (t < -1.0) ? -1.0 : 1.0;
    }
    // T_0 = 1, T_1 = t, T_{k+1} = 2 t T_k - T_{k-1}
    double acc = coeffs[0];
    double tkm1 = 1.0, tk = t;
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        acc += coeffs[k] * tk;
        const double tkp1 = 2.0 * t * tk - tkm1;
        tkm1 = tk;
        tk = tkp1;
    }
    return acc;
}

ChebyshevSeries fit_chebyshev(const std::function<double(double)>& f, double lambda_max,
                              int order) {
    if (!(lambda_max > 0.0)) throw std::invalid_argument("fit_chebyshev: lambda_max must be positive");
    if (order < 0) throw std::invalid_argument("fit_chebyshev: order must be nonnegative");
    const int n = order + 1;

    // Sample at Chebyshev-Gauss nodes t_j = cos(pi (j+1/2)/n), mapped to
    // lambda = lambda_max (1+t)/2.
    std::vector<double> samples(n);
    for (int j = 0; j < n; ++j) {
        const double t = std::cos(M_PI * (j + 0.5) / n);
        samples[j] = f(0.5 * lambda_max * (1.0 + t));
    }

    // REDFT10 computes out_k = 2 sum_j in_j cos(pi k (j+1/2)/n), so
    // c_k = out_k / n is the discrete Chebyshev coefficient.
    std::vector<double> out(n);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_plan plan = fftw_plan_r2r_1d(n, samples.data(), out.data(), FFTW_REDFT10,
                                          FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        if (!plan) throw std::runtime_error("fit_chebyshev: FFTW plan creation failed");
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    ChebyshevSeries series;
    series.lambda_max = lambda_max;
    series.coeffs.resize(n);
    series.coeffs[0] = out[0] / (2.0 * n);  // half-folded leading coefficient
    for (int k = 1; k < n; ++k) series.coeffs[k] = out[k] / n;
    return series;
}

ChebyshevSeries fit_chebyshev(const PowerSpectralDensity& psd, double lambda_max, int order) {
    return fit_chebyshev([&psd](double lambda) { return psd.eval(lambda); }, lambda_max, order);
}

OrderSelection select_order(const PowerSpectralDensity& psd, double lambda_max, double ratio_tol,
                            int k_cap) {
    if (!(ratio_tol > 0.0 && ratio_tol < 1.0))
        throw std::invalid_argument("select_order: ratio_tol must be in (0,1)");
    if (k_cap < 1) throw std::invalid_argument("select_order: k_cap must be positive");

    // The raw projection coefficients c_k decay; the stored a_0 = c_0/2 is
    // unfolded before taking the criterion maximum.
    auto raw = [](const ChebyshevSeries& s, int k) {
        return (k == 0) ? 2.0 * s.coeffs[0] : s.coeffs[k];
    };

    for (int fit_order = 16;; fit_order *= 2) {
        if (fit_order > k_cap) fit_order = k_cap;
        const ChebyshevSeries series = fit_chebyshev(psd, lambda_max, fit_order);
        double running_max = 0.0;
        for (int k = 0; k <= fit_order; ++k) {
            const double ck = std::fabs(raw(series, k));
            if (ck > running_max) running_max = ck;
            if (k > 0 && running_max > 0.0 && ck < ratio_tol * running_max)
                return {k, false};
        }
        if (fit_order == k_cap) return {k_cap, true};
    }
}

double uniform_error_bound(const PowerSpectralDensity& psd, const ChebyshevSeries& series) {
    const int K = series.order();
    if (const auto chi = psd.analyticity_margin()) {
        const double ratio = *chi / series.lambda_max;
        const double eps = 2.0 * (ratio + std::sqrt(ratio * (1.0 + ratio)));
        const double rho = 1.0 + eps;
        double sup;
        if (psd.kind() == PowerSpectralDensity::Kind::Matern) {
            sup = psd.analytic_sup_on_ellipse(series.lambda_max);
        } else {
            // Custom analytic densities must bound themselves through the
            // declared margin; the value at the leftmost real point of the
            // ellipse is the natural proxy for a decreasing density.
            sup = psd.eval(0.0);
        }
        return 2.0 * sup / (std::pow(rho, K) * eps);
    }
    if (const auto nu = psd.smoothness_order()) {
        const auto tv = psd.mapped_total_variation(series.lambda_max);
        if (!tv) throw std::invalid_argument(
            "uniform_error_bound: smooth density lacks a total-variation declaration");
        if (K <= *nu) return std::numeric_limits<double>::infinity();
        return 2.0 * (*tv) / (M_PI * (*nu) * std::pow(static_cast<double>(K - *nu), *nu));
    }
    throw std::invalid_argument(
        "uniform_error_bound: density declares neither analyticity nor smoothness");
}

}  // namespace grf

// SPDX-License-Identifier: MIT
#include "grf/sphere_spectral.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace grf {

namespace {

// Column of fully normalized associated Legendre values P'_lm(x) for fixed
// m and l = m..L, by the stable three-term recurrence:
//   P'_00 = sqrt(1/4pi)
//   P'_mm = -sqrt((2m+1)/(2m)) s P'_{m-1,m-1}      (s = sin theta >= 0)
//   P'_{m+1,m} = sqrt(2m+3) x P'_mm
//   P'_lm = a_l (x P'_{l-1,m} - P'_{l-2,m}/a_{l-1}),  a_l = sqrt((4l^2-1)/(l^2-m^2))
void normalized_legendre_column(int L, int m, double x, double s, std::vector<double>& out) {
    out.assign(L - m + 1, 0.0);
    double pmm = std::sqrt(1.0 / (4.0 * M_PI));
    for (int k = 1; k <= m; ++k) pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
    out[0] = pmm;
    if (L == m) return;
    double plm1 = pmm;                               // P'_{m,m}
    double pl = std::sqrt(2.0 * m + 3.0) * x * pmm;  // P'_{m+1,m}
    out[1] = pl;
    double a_prev = std::sqrt((4.0 * (m + 1.0) * (m + 1.0) - 1.0) /
                              ((m + 1.0) * (m + 1.0) - static_cast<double>(m) * m));
    for (int l = m + 2; l <= L; ++l) {
        const double a = std::sqrt((4.0 * static_cast<double>(l) * l - 1.0) /
                                   (static_cast<double>(l) * l - static_cast<double>(m) * m));
        const double next = a * (x * pl - plm1 / a_prev);
        plm1 = pl;
        pl = next;
        out[l - m] = next;
        a_prev = a;
    }
}

// Estimate of the raw tail sum_{l > L} (2l+1) gamma(l(l+1))^2 (no 1/4pi).
// Matern has the closed integral bound (kappa^2 + L(L+1))^(1-2beta)/(2beta-1);
// custom densities get a numeric continuation that extends the sum a few
// multiples of L and closes with the declared algebraic decay.
double covariance_tail_estimate(const PowerSpectralDensity& psd, long L) {
    if (psd.kind() == PowerSpectralDensity::Kind::Matern) {
        const double beta = psd.beta();
        const double u = psd.kappa2() + static_cast<double>(L) * (L + 1.0);
        return std::pow(u, 1.0 - 2.0 * beta) / (2.0 * beta - 1.0);
    }
    double tail = 0.0;
    const long extend = std::max(4L * L, L + 4096L);
    for (long l = L + 1; l <= extend; ++l) {
        const double g = psd.eval(static_cast<double>(l) * (l + 1.0));
        tail += (2.0 * l + 1.0) * g * g;
    }
    const double glast = psd.eval(static_cast<double>(extend) * (extend + 1.0));
    const double p = 4.0 * psd.beta() - 1.0;  // (2l+1) gamma^2 ~ l^(-p)
    if (p > 1.0)
        tail += (2.0 * extend + 1.0) * glast * glast * extend / (p - 1.0);
    return tail;
}

}  // namespace

double eval_Ylm(int l, int m, double theta, double phi) {
    if (l < 0 || std::abs(m) > l)
        throw std::invalid_argument("eval_Ylm: require l >= 0 and |m| <= l");
    const int mm = std::abs(m);
    const double x = std::cos(theta);
    const double s = std::sin(theta);
    std::vector<double> column;
    normalized_legendre_column(l, mm, x, s, column);
    const double plm = column[l - mm];
    if (m == 0) return plm;
    const double sqrt2 = std::sqrt(2.0);
    return (m > 0) ? sqrt2 * plm * std::cos(mm * phi) : sqrt2 * plm * std::sin(mm * phi);
}

std::vector<double> sample_spectral(int L_trunc, const PowerSpectralDensity& psd,
                                    NormalStream& rng,
                                    const std::vector<std::array<double, 2>>& eval_points) {
    if (L_trunc < 0) throw std::invalid_argument("sample_spectral: L_trunc must be nonnegative");
    // One weight per mode, consumed in linear-index order.
    const long n_modes = (static_cast<long>(L_trunc) + 1) * (L_trunc + 1);
    std::vector<double> weights(n_modes);
    rng.fill(weights.data(), n_modes);

    std::vector<double> gamma(L_trunc + 1);
    for (int l = 0; l <= L_trunc; ++l)
        gamma[l] = psd.eval(static_cast<double>(l) * (l + 1.0));

    const double sqrt2 = std::sqrt(2.0);
    std::vector<double> field(eval_points.size(), 0.0);
    std::vector<double> column;
    for (std::size_t p = 0; p < eval_points.size(); ++p) {
        const double theta = eval_points[p][0];
        const double phi = eval_points[p][1];
        const double x = std::cos(theta);
        const double s = std::sin(theta);
        double acc = 0.0;
        // iterate by |m| so each Legendre column is computed once
        for (int mm = 0; mm <= L_trunc; ++mm) {
            normalized_legendre_column(L_trunc, mm, x, s, column);
            const double c = std::cos(mm * phi);
            const double sn = std::sin(mm * phi);
            for (int l = mm; l <= L_trunc; ++l) {
                const double plm = column[l - mm];
                if (mm == 0) {
                    acc += gamma[l] * weights[SphericalHarmonicIndex{l, 0}.linear() - 1] * plm;
                } else {
                    const double w_cos = weights[SphericalHarmonicIndex{l, mm}.linear() - 1];
                    const double w_sin = weights[SphericalHarmonicIndex{l, -mm}.linear() - 1];
                    acc += gamma[l] * sqrt2 * plm * (w_cos * c + w_sin * sn);
                }
            }
        }
        field[p] = acc;
    }
    return field;
}

double covariance_exact(double theta, const PowerSpectralDensity& psd, int L_max) {
    if (L_max < 0) throw std::invalid_argument("covariance_exact: L_max must be nonnegative");
    // partial sums of C(theta) and C(0) (P_l(1) = 1) in one pass
    const double x = std::cos(theta);
    double c_theta = 0.0, c_zero = 0.0;
    double pl_prev = 1.0, pl = x;  // P_0, P_1
    for (int l = 0; l <= L_max; ++l) {
        const double g = psd.eval(static_cast<double>(l) * (l + 1.0));
        const double weight = (2.0 * l + 1.0) / (4.0 * M_PI) * g * g;
        c_theta += weight * ((l == 0) ? 1.0 : pl);
        c_zero += weight;
        if (l >= 1) {
            const double pl_next = ((2.0 * l + 1.0) * x * pl - l * pl_prev) / (l + 1.0);
            pl_prev = pl;
            pl = pl_next;
        }
    }
    const double tail = covariance_tail_estimate(psd, L_max) / (4.0 * M_PI);
    if (!(tail < 1e-12 * c_zero)) {
        throw std::invalid_argument("covariance_exact: degree " + std::to_string(L_max) +
                                    " leaves a tail above 1e-12 * C(0); degree " +
                                    std::to_string(covariance_required_degree(psd)) +
                                    " suffices");
    }
    return c_theta;
}

int covariance_required_degree(const PowerSpectralDensity& psd, double rel_tol) {
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("covariance_required_degree: rel_tol must be positive");
    // Raw partial sum S(L) = sum_{l <= L} (2l+1) gamma^2 grows with L, so
    // extend it while doubling the candidate degree (the 1/4pi cancels).
    double s_sum = 0.0;
    long covered = -1;
    for (long candidate = 16; candidate <= (1L << 24); candidate *= 2) {
        for (long l = covered + 1; l <= candidate; ++l) {
            const double g = psd.eval(static_cast<double>(l) * (l + 1.0));
            s_sum += (2.0 * l + 1.0) * g * g;
        }
        covered = candidate;
        if (covariance_tail_estimate(psd, candidate) < rel_tol * s_sum) {
            // smallest sufficient degree below the candidate; S(mid) is
            // bounded below by S(candidate) - tail(mid), which keeps the
            // test conservative without re-summing
            long lo = (candidate == 16) ? -1 : candidate / 2;
            long hi = candidate;
            while (lo + 1 < hi) {
                const long mid = (lo + hi) / 2;
                const double tail = covariance_tail_estimate(psd, mid);
                if (tail < rel_tol * (s_sum - tail))
                    hi = mid;
                else
                    lo = mid;
            }
            return static_cast<int>(hi);
        }
    }
    throw std::runtime_error("covariance_required_degree: tail does not reach tolerance by "
                             "degree 2^24; density decays too slowly");
}

std::vector<double> covariance_exact_batch(const std::vector<double>& thetas,
                                           const PowerSpectralDensity& psd, double rel_tol) {
    const int L = covariance_required_degree(psd, rel_tol);
    const Eigen::Index n = static_cast<Eigen::Index>(thetas.size());
    Eigen::ArrayXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = std::cos(thetas[static_cast<std::size_t>(i)]);
    Eigen::ArrayXd pl_prev = Eigen::ArrayXd::Ones(n);  // P_0
    Eigen::ArrayXd pl = x;                             // P_1
    Eigen::ArrayXd pl_next(n);
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n);
    for (int l = 0; l <= L; ++l) {
        const double g = psd.eval(static_cast<double>(l) * (l + 1.0));
        const double weight = (2.0 * l + 1.0) / (4.0 * M_PI) * g * g;
        if (l == 0)
            acc += weight;
        else
            acc += weight * pl;
        if (l >= 1 && l < L) {
            pl_next = ((2.0 * l + 1.0) * x * pl - static_cast<double>(l) * pl_prev) / (l + 1.0);
            pl_prev.swap(pl);
            pl.swap(pl_next);
        }
    }
    return std::vector<double>(acc.data(), acc.data() + n);
}

double truncation_error_exact(long n_modes, const PowerSpectralDensity& psd) {
    if (n_modes < 0)
        throw std::invalid_argument("truncation_error_exact: n_modes must be nonnegative");
    // Modes of degree l occupy linear indices (l^2, (l+1)^2]. Find the
    // degree containing mode n_modes+1 and add its leftover multiplicity,
    // then whole degrees until the increment is negligible.
    long l = static_cast<long>(std::floor(std::sqrt(static_cast<double>(n_modes))));
    while (l > 0 && l * l > n_modes) --l;  // guard the float sqrt at exact squares
    while ((l + 1) * (l + 1) <= n_modes) ++l;
    double total = 0.0;
    {
        const long count = (l + 1) * (l + 1) - std::max(n_modes, l * l);
        const double g = psd.eval(static_cast<double>(l) * (l + 1.0));
        total += static_cast<double>(count) * g * g;
    }
    long zero_run = 0;
    for (long deg = l + 1;; ++deg) {
        const double g = psd.eval(static_cast<double>(deg) * (deg + 1.0));
        const double term = (2.0 * deg + 1.0) * g * g;
        total += term;
        if (total > 0.0 && term < 1e-14 * total) break;
        // Compactly supported densities leave total at zero (or freeze it);
        // a long run of exactly-zero terms ends the sum.
        zero_run = (term == 0.0) ? zero_run + 1 : 0;
        if (zero_run >= 1024) break;
        if (deg >= (1L << 31))
            throw std::runtime_error("truncation_error_exact: tail did not converge");
    }
    return std::sqrt(total);
}

}  // namespace grf

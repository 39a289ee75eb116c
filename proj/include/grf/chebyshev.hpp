// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <vector>

#include "grf/psd.hpp"

namespace grf {

// Truncated Chebyshev series targeting [0, lambda_max]. coeffs[k] = a_k
// where the represented polynomial is
//   P(lambda) = a_0*T_0(t) + a_1*T_1(t) + ... + a_K*T_K(t),
//   t = 2*lambda/lambda_max - 1.
// The leading coefficient is stored half-folded (a_0 is half the raw
// projection coefficient c_0 = (2/pi)<f,T_0>), so evaluation and the
// matrix recurrence are plain dot products with T_k. Immutable once fitted.
struct ChebyshevSeries {
    std::vector<double> coeffs;
    double lambda_max = 0.0;

    int order() const { return static_cast<int>(coeffs.size()) - 1; }

    // P(lambda) by the three-term recurrence on t = 2*lambda/lambda_max - 1.
    // lambda slightly outside [0, lambda_max] is clamped to
    // t in [-1 - 1e-9, 1 + 1e-9] and counted (see cheb_clamp_count);
    // anything farther out is rejected.
    double eval_scalar(double lambda) const;
};

// Number of out-of-interval evaluations that were clamped, process-wide.
// Eigenvalues never exceed a certified lambda_max, so nonzero counts only
// arise from floating-point drift; tests assert the counter stays small.
long cheb_clamp_count();

// Chebyshev coefficients of f on [0, lambda_max] through order K, computed
// by sampling f at the K+1 Chebyshev-Gauss nodes t_j = cos(pi (j+1/2)/(K+1))
// and a type-II fast cosine transform, O(K log K) total. Coefficients are
// exact for polynomials of degree <= K and match the projection integrals
// c_k = (2/pi) <f, T_k> for smooth f (aliasing-free at this order).
ChebyshevSeries fit_chebyshev(const std::function<double(double)>& f, double lambda_max, int order);
ChebyshevSeries fit_chebyshev(const PowerSpectralDensity& psd, double lambda_max, int order);

struct OrderSelection {
    int order = 0;
    bool hit_cap = false;  // criterion never met below k_cap; order == k_cap
};

// Smallest K <= k_cap with |c_K| / max_{k<=K} |c_k| < ratio_tol, found by
// refitting at doubling orders starting from 16. Returns k_cap with the
// warning flag set if the criterion is never met.
OrderSelection select_order(const PowerSpectralDensity& psd, double lambda_max,
                            double ratio_tol = 1e-12, int k_cap = 1 << 16);

// A-priori sup-norm bound on |gamma - P| over [0, lambda_max] for the
// series' order K:
//  - analytic branch (margin chi):  2 * sup / (rho^K (rho - 1)) with
//    rho = 1 + eps, eps = 2*(chi + sqrt(chi*(lambda_max + chi)))/lambda_max,
//    sup = analytic sup of |gamma| on the ellipse;
//  - finite-smoothness branch (order nu, declared TV of the nu-th mapped
//    derivative): 2 * TV / (pi * nu * (K - nu)^nu), infinite for K <= nu.
// Densities with neither metadata are rejected.
double uniform_error_bound(const PowerSpectralDensity& psd, const ChebyshevSeries& series);

}  // namespace grf

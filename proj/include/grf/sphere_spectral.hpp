// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <vector>

#include "grf/psd.hpp"
#include "grf/rng.hpp"

namespace grf {

// Exact unit-sphere oracle: the Laplacian eigenvalues are l(l+1) with the
// real spherical harmonics Y_{l,m} as eigenfunctions, so fields, their
// covariance and the truncation error all have closed forms to test the
// mesh-based pipeline against.

// Basis index: degree l >= 0, order m in [-l, l]. The linear index
// k(l,m) = l^2 + l + m + 1 enumerates modes so that eigenvalue l(l+1)
// occupies positions l^2+1 .. (l+1)^2 (multiplicity 2l+1).
struct SphericalHarmonicIndex {
    int l = 0;
    int m = 0;
    long linear() const { return static_cast<long>(l) * l + l + m + 1; }
};

// Real orthonormal spherical harmonic at colatitude theta, longitude phi:
//   m = 0:  P'_l0(cos theta)
//   m > 0:  sqrt(2) P'_lm(cos theta) cos(m phi)
//   m < 0:  sqrt(2) P'_l|m|(cos theta) sin(|m| phi)
// with P'_lm the fully normalized associated Legendre functions (Condon-
// Shortley sign folded into the recurrence, no factorials formed, stable
// to high degree). Unit L2 norm on the sphere; |m| <= l required.
double eval_Ylm(int l, int m, double theta, double phi);

// Spectral Karhunen-Loeve draw truncated at degree L_trunc, evaluated at
// (theta, phi) points: Z(x) = sum_{l <= L_trunc, m} gamma(l(l+1)) W_lm
// Y_lm(x). Weights are consumed in linear-index order, so a draw is a pure
// function of the stream.
std::vector<double> sample_spectral(int L_trunc, const PowerSpectralDensity& psd,
                                    NormalStream& rng,
                                    const std::vector<std::array<double, 2>>& eval_points);

// Angular covariance of the full field between points at angle theta:
//   C(theta) = sum_l (2l+1)/(4pi) gamma(l(l+1))^2 P_l(cos theta),
// summed through degree L_max by the Legendre recurrence. The neglected
// tail must be below 1e-12 * C(0); if the (closed-form, Matern) or
// (numeric continuation, custom) tail estimate violates that, throws and
// names the degree that would suffice.
double covariance_exact(double theta, const PowerSpectralDensity& psd, int L_max);

// Smallest degree whose tail estimate passes the covariance_exact
// precondition at the given relative tolerance.
int covariance_required_degree(const PowerSpectralDensity& psd, double rel_tol = 1e-12);

// covariance_exact over many angles in a single pass: the degree is picked
// by covariance_required_degree and each Legendre term is shared across all
// angles, so the cost is O(L + L * thetas.size()) instead of one full series
// per angle. Slowly decaying densities need degrees in the millions, where
// the per-angle route is infeasible.
std::vector<double> covariance_exact_batch(const std::vector<double>& thetas,
                                           const PowerSpectralDensity& psd,
                                           double rel_tol = 1e-12);

// Exact truncation error of the Karhunen-Loeve expansion after n_modes
// modes (linear-index counting): sqrt(sum_{k > n_modes} gamma(lambda_k)^2),
// the tail summed degree by degree until the relative increment drops
// below 1e-14.
double truncation_error_exact(long n_modes, const PowerSpectralDensity& psd);

}  // namespace grf

// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grf/operators.hpp"
#include "grf/psd.hpp"

namespace grf {

// Ordinary least squares line fit y = intercept + slope * x with the
// normal-equation standard error of the slope and the coefficient of
// determination. Requires at least three points.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergencePoint {
    double resolution = 0.0;  // study-specific: mode count, order K, vertex count
    double error = 0.0;
};

// Result of one convergence study: the (resolution, error) table, the
// fitted decay rate with its uncertainty, and the pass verdict against the
// study's expected rate. `degenerate` marks fits that could not be made
// honestly (fewer than three positive errors in the fit window); a
// degenerate report never passes. fit_begin/fit_end delimit the half-open
// range of `points` actually fitted, after dropping nonpositive errors,
// an optional pre-asymptotic first point, and (for the polynomial study)
// the stagnation floor.
struct ConvergenceReport {
    std::string study;
    std::vector<ConvergencePoint> points;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
    double expected_slope = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool degenerate = false;
    long fit_begin = 0;
    long fit_end = 0;
    double wall_seconds = 0.0;
    std::map<std::string, double> extras;  // study-specific scalars
    std::string config_json;               // echo of the configuration
};

// Writes report.csv (resolution,error rows; byte-stable for a given
// config) and report.json (fit, verdict, extras, config echo; byte-stable
// except for the wall_seconds field) into out_dir, creating it if needed.
void write_report(const ConvergenceReport& report, const std::string& out_dir);

// --- Karhunen-Loeve truncation error on the unit sphere ------------------
// error(n) = truncation_error_exact(n); expected log-log slope -nu/2.
struct TruncationStudyConfig {
    double nu = 1.0;
    double a = M_PI / 6.0;
    std::vector<long> orders = {100, 1000, 10000, 50000, 100000};
    double tolerance = 0.05;
    bool drop_first = false;
};
ConvergenceReport run_truncation_study(const TruncationStudyConfig& config);
// Same study for an arbitrary density (expected slope -psd.nu()/2); zero
// errors, as produced by compactly supported densities, are excluded from
// the fit and flag the report degenerate.
ConvergenceReport run_truncation_study(const PowerSpectralDensity& psd,
                                       const std::vector<long>& orders, double tolerance,
                                       bool drop_first);

// --- Polynomial approximation error on sphere eigenvalues ----------------
// error(K)^2 = sum_{k <= n_modes} (gamma(lambda_k) - P_K(lambda_k))^2 with
// lambda ranging over l(l+1) with multiplicity 2l+1 (the top degree
// partially, when n_modes is not a perfect square). The fit is log(error)
// versus K (exponential decay, so a straight line), restricted to the
// window above the stagnation floor: points with error <= 10x the smallest
// error are dropped from the fit. Pass means r_squared >= r2_threshold on
// that window and error(K_selected) <= ratio_threshold * error(K=1);
// expected_slope carries the a-priori rate -log(rho) for reference only.
struct ChebErrorStudyConfig {
    double nu = 1.0;
    double a = M_PI / 6.0;
    long n_modes = 1024;
    std::vector<int> orders_K;  // empty: grid of 24 orders from 1 to K_selected
    double cheb_tol = 1e-12;
    int cheb_cap = 1 << 16;
    double r2_threshold = 0.98;
    double ratio_threshold = 1e-10;
};
ConvergenceReport run_cheb_error_study(const ChebErrorStudyConfig& config);

// --- Covariance error on the unit sphere ----------------------------------
// Per icosphere level: covariance of the discretized field between the
// north pole and 500 equispaced colatitudes on the meridian (hat-basis
// interpolation at the mesh surface), against the exact angular covariance
// series; error = max abs deviation, resolution = vertex count, expected
// slope -nu. Dense mode evaluates the exact weight covariance through the
// dense eigendecomposition; mc mode estimates it from sample_batch draws.
// A level whose vertex count exceeds dense_cap falls back to mc with a
// warning on stderr.
struct SphereCovarianceStudyConfig {
    double nu = 1.0;
    double a = M_PI / 6.0;
    std::vector<int> levels = {1, 2, 3, 4};
    std::string mode = "dense";  // "dense" or "mc"
    long mc_samples = 100000;
    MassMode mass_mode = MassMode::Cholesky;
    int dense_cap = 3000;
    int n_angles = 500;
    double tolerance = 0.15;
    bool drop_first = false;
    std::uint64_t seed = 1;  // mc mode only
    int workers = 1;         // mc mode only; result independent of the count
    double cheb_tol = 1e-12;
    int cheb_cap = 1 << 16;
};
ConvergenceReport run_sphere_covariance_study(const SphereCovarianceStudyConfig& config);

// --- Covariance self-convergence on the hyperboloid sheet ----------------
// The last entry of `levels` is the reference: its covariance between
// (1,0,0) and the 101 points (sqrt(1+z^2), 0, z), z = -2 + 0.04 i, is
// computed by the eigendecomposition-free polynomial route (identical to
// the dense route up to the 1e-12 fit tolerance, but feasible above the
// dense cap). Earlier levels are evaluated densely when they fit the cap
// (mc fallback with a warning otherwise) and compared against the
// reference; resolution = vertex count, expected slope -nu.
struct HyperboloidCovarianceStudyConfig {
    double nu = 1.0;
    double a = 0.5;
    std::vector<int> levels = {0, 1, 2, 3};
    long mc_samples = 100000;
    MassMode mass_mode = MassMode::Cholesky;
    int dense_cap = 3000;
    int n_points = 101;
    double tolerance = 0.2;
    bool drop_first = false;
    std::uint64_t seed = 1;
    int workers = 1;
    double cheb_tol = 1e-12;
    int cheb_cap = 1 << 16;
};
ConvergenceReport run_hyperboloid_covariance_study(const HyperboloidCovarianceStudyConfig& config);

}  // namespace grf

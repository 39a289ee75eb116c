// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <optional>
#include <string>

namespace grf {

// Power spectral density gamma: a positive, decaying function of Laplacian
// eigenvalues that fixes the smoothness and correlation structure of the
// field. Matern densities gamma(lambda) = (kappa^2 + lambda)^(-beta) carry
// full analyticity metadata; custom densities must declare their decay and
// smoothness explicitly since they cannot be inferred from an evaluator.
// Immutable after construction; safe to share across threads.
class PowerSpectralDensity {
public:
    enum class Kind { Matern, Custom };

    // Matern density with kappa^2 = kappa2 > 0 and beta > 1/2 (the decay
    // condition for a 2-dimensional surface). The smoothness parameter is
    // nu = 2*beta - 1.
    static PowerSpectralDensity matern(double kappa2, double beta);

    // Matern density from the smoothness nu > 0 and practical range a > 0:
    //   kappa = 3.6527 * nu^0.4874 / a,   beta = (nu + 1) / 2.
    // The beta(nu) link is the d = 2 convention that makes the field's
    // truncation rate nu/2 and covariance rate nu; it is asserted by the
    // convergence studies rather than assumed.
    static PowerSpectralDensity matern_from_range(double nu, double a);

    // Custom density. beta is the declared decay exponent (gamma(lambda)
    // decays like lambda^(-beta)); smoothness metadata feeds the a-priori
    // error bound only:
    //  - smoothness_order nu >= 1 with mapped_total_variation(lambda_max)
    //    returning TV of the nu-th derivative of gamma(lambda_max*(1+t)/2)
    //    on t in [-1,1], or
    //  - analyticity_margin chi > 0 (gamma analytic on Re(lambda) > -chi).
    static PowerSpectralDensity custom(
        std::function<double(double)> evaluator, double beta,
        std::optional<int> smoothness_order = std::nullopt,
        std::optional<std::function<double(double)>> mapped_total_variation = std::nullopt,
        std::optional<double> analyticity_margin = std::nullopt);

    Kind kind() const { return kind_; }

    // gamma(lambda); lambda < 0 is rejected.
    double eval(double lambda) const;

    // kappa^2 (Matern only; throws otherwise).
    double kappa2() const;
    // Decay exponent: the Matern beta, or the declared decay of a custom
    // density.
    double beta() const;
    // Smoothness nu = 2*beta - 1 for Matern; throws for custom densities
    // without a declared order.
    double nu() const;

    // Heuristic correlation range a = 3.6527 * kappa^(-1) * nu^0.4874
    // (Matern only). Inverse of matern_from_range.
    double practical_range() const;

    // Sup of |gamma| on the Bernstein-type ellipse associated with the
    // interval [0, lambda_max]: (kappa^2/2)^(-beta). The ellipse with
    // margin chi = kappa^2/2 keeps Re(kappa^2 + lambda) >= kappa^2/2, so
    // the bound does not depend on lambda_max. Matern only.
    double analytic_sup_on_ellipse(double lambda_max) const;

    // chi such that gamma composed with the interval map is analytic on the
    // Bernstein ellipse with parameter 1 + eps(chi); empty if not declared.
    std::optional<double> analyticity_margin() const { return analyticity_margin_; }
    std::optional<int> smoothness_order() const { return smoothness_order_; }
    // TV of the smoothness_order-th derivative of the mapped density on
    // [-1,1]; empty unless declared.
    std::optional<double> mapped_total_variation(double lambda_max) const;

    // One-line description for metadata sidecars, e.g. "matern kappa2=... beta=...".
    std::string describe() const;

private:
    PowerSpectralDensity() = default;

    Kind kind_ = Kind::Matern;
    double kappa2_ = 0.0;
    double beta_ = 0.0;
    std::function<double(double)> evaluator_;
    std::optional<int> smoothness_order_;
    std::optional<std::function<double(double)>> mapped_tv_;
    std::optional<double> analyticity_margin_;
};

}  // namespace grf

// SPDX-License-Identifier: MIT
#include "grf/psd.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace grf {

namespace {
constexpr double kRangeFactor = 3.6527;
constexpr double kRangeExponent = 0.4874;
}  // namespace

PowerSpectralDensity PowerSpectralDensity::matern(double kappa2, double beta) {
    if (!(kappa2 > 0.0)) throw std::invalid_argument("matern: kappa2 must be positive");
    if (!(beta > 0.5)) throw std::invalid_argument("matern: beta must exceed 1/2");
    PowerSpectralDensity psd;
    psd.kind_ = Kind::Matern;
    psd.kappa2_ = kappa2;
    psd.beta_ = beta;
    psd.analyticity_margin_ = kappa2 / 2.0;
    return psd;
}

PowerSpectralDensity PowerSpectralDensity::matern_from_range(double nu, double a) {
    if (!(nu > 0.0)) throw std::invalid_argument("matern_from_range: nu must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("matern_from_range: range must be positive");
    const double kappa = kRangeFactor * std::pow(nu, kRangeExponent) / a;
    return matern(kappa * kappa, (nu + 1.0) / 2.0);
}

PowerSpectralDensity PowerSpectralDensity::custom(
    std::function<double(double)> evaluator, double beta,
    std::optional<int> smoothness_order,
    std::optional<std::function<double(double)>> mapped_total_variation,
    std::optional<double> analyticity_margin) {
    if (!evaluator) throw std::invalid_argument("custom: evaluator required");
    if (!(beta > 0.0)) throw std::invalid_argument("custom: decay exponent must be positive");
    if (smoothness_order && *smoothness_order < 1)
        throw std::invalid_argument("custom: smoothness order must be >= 1");
    if (analyticity_margin && !(*analyticity_margin > 0.0))
        throw std::invalid_argument("custom: analyticity margin must be positive");
    PowerSpectralDensity psd;
    psd.kind_ = Kind::Custom;
    psd.beta_ = beta;
    psd.evaluator_ = std::move(evaluator);
    psd.smoothness_order_ = smoothness_order;
    psd.mapped_tv_ = std::move(mapped_total_variation);
    psd.analyticity_margin_ = analyticity_margin;
    return psd;
}

double PowerSpectralDensity::eval(double lambda) const {
    if (lambda < 0.0) throw std::invalid_argument("psd eval: lambda must be nonnegative");
    if (kind_ == Kind::Matern) return std::pow(kappa2_ + lambda, -beta_);
    return evaluator_(lambda);
}

double PowerSpectralDensity::kappa2() const {
    if (kind_ != Kind::Matern) throw std::logic_error("kappa2: not a Matern density");
    return kappa2_;
}

double PowerSpectralDensity::beta() const { return beta_; }

double PowerSpectralDensity::nu() const {
    if (kind_ == Kind::Matern) return 2.0 * beta_ - 1.0;
    if (smoothness_order_) return static_cast<double>(*smoothness_order_);
    throw std::logic_error("nu: custom density without declared smoothness");
}

double PowerSpectralDensity::practical_range() const {
    if (kind_ != Kind::Matern) throw std::logic_error("practical_range: not a Matern density");
    return kRangeFactor * std::pow(nu(), kRangeExponent) / std::sqrt(kappa2_);
}

double PowerSpectralDensity::analytic_sup_on_ellipse(double lambda_max) const {
    if (kind_ != Kind::Matern)
        throw std::invalid_argument("analytic_sup_on_ellipse: requires a Matern density");
    if (!(lambda_max > 0.0))
        throw std::invalid_argument("analytic_sup_on_ellipse: lambda_max must be positive");
    return std::pow(kappa2_ / 2.0, -beta_);
}

std::optional<double> PowerSpectralDensity::mapped_total_variation(double lambda_max) const {
    if (!mapped_tv_) return std::nullopt;
    return (*mapped_tv_)(lambda_max);
}

std::string PowerSpectralDensity::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind_ == Kind::Matern) {
        os << "matern kappa2=" << kappa2_ << " beta=" << beta_;
    } else {
        os << "custom beta=" << beta_;
        if (smoothness_order_) os << " smoothness=" << *smoothness_order_;
        if (analyticity_margin_) os << " chi=" << *analyticity_margin_;
    }
    return os.str();
}

}  // namespace grf

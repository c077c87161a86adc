#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "shapetest/distributions.hpp"
#include "shapetest/rng.hpp"

namespace shapetest {

// Nonincreasing step density: heights[j] on (breakpoints[j], breakpoints[j+1]].
class StepDensity {
public:
    StepDensity(std::vector<double> breakpoints, std::vector<double> heights);

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<double>& heights() const noexcept { return heights_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double sample(RngStream& rng) const;
    std::pair<double, double> support() const { return {breakpoints_.front(), breakpoints_.back()}; }

private:
    std::vector<double> breakpoints_;
    std::vector<double> heights_;
    std::vector<double> cum_;  // mass up to breakpoints_[j]
};

// k-monotone mixture f(x) = sum_j w_j k (a_j - x)_+^{k-1} / a_j^k on (0, max a_j).
class BetaKernelMixture {
public:
    BetaKernelMixture(int k, std::vector<double> support_points, std::vector<double> weights);

    int k() const noexcept { return k_; }
    const std::vector<double>& support_points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double sample(RngStream& rng) const;
    std::pair<double, double> support() const { return {0.0, points_.back()}; }

private:
    int k_;
    std::vector<double> points_;
    std::vector<double> weights_;
};

// Completely monotone mixture f(t) = sum_i p_i lambda_i exp(-lambda_i t) on (0, inf).
class ExpMixture {
public:
    ExpMixture(std::vector<double> rates, std::vector<double> weights);

    const std::vector<double>& rates() const noexcept { return rates_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double sample(RngStream& rng) const;
    std::pair<double, double> support() const;

private:
    std::vector<double> rates_;
    std::vector<double> weights_;
};

// exp(phi) with phi concave and linear between knots, zero outside [knots.front(), knots.back()].
class PiecewiseLogLinear {
public:
    PiecewiseLogLinear(std::vector<double> knots, std::vector<double> phi);

    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& phi() const noexcept { return phi_; }

    double log_pdf(double x) const;
    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double sample(RngStream& rng) const;
    std::pair<double, double> support() const { return {knots_.front(), knots_.back()}; }

private:
    std::vector<double> knots_;
    std::vector<double> phi_;
    std::vector<double> cum_;  // mass up to knots_[j]
};

using Density = std::variant<StepDensity, BetaKernelMixture, ExpMixture, PiecewiseLogLinear, ReferenceDistribution>;

// Serialization tag: "step", "beta_kernel_mixture", "exp_mixture",
// "piecewise_log_linear" or "reference".
std::string_view type_name(const Density& d);

double pdf_at(const Density& d, double x);
double cdf_at(const Density& d, double x);
double quantile(const Density& d, double u);
std::vector<double> sample_n(const Density& d, std::size_t n, RngStream& rng);
std::pair<double, double> support(const Density& d);

// out[i] = pdf_at(d, x[i]); mixtures go through the vector kernels.
void pdf_many(const Density& d, std::span<const double> x, std::span<double> out);

}  // namespace shapetest

#include "shapetest/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "loglinear.hpp"
#include "numeric.hpp"
#include "shapetest/error.hpp"
#include "shapetest/format.hpp"
#include "shapetest/kernels.hpp"

namespace shapetest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw Error(ErrorCode::InvalidArgument, what);
    }
}

void require_increasing(const std::vector<double>& xs, std::string_view what, std::size_t min_size)
{
    require(xs.size() >= min_size, std::string(what) + " needs at least " + std::to_string(min_size) + " entries");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(std::isfinite(xs[i]), std::string(what) + " must be finite");
        if (i > 0) {
            require(xs[i - 1] < xs[i], std::string(what) + " must be strictly increasing");
        }
    }
}

void require_simplex(const std::vector<double>& w, std::size_t size)
{
    require(w.size() == size, "weights and atoms differ in length");
    double sum = 0.0;
    for (double x : w) {
        require(x > 0.0 && std::isfinite(x), "mixture weights must be positive");
        sum += x;
    }
    require(std::abs(sum - 1.0) <= 1e-10, "mixture weights must sum to 1 (got " + format_double(sum) + ")");
}

std::size_t pick_component(const std::vector<double>& w, double u)
{
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        acc += w[k];
        if (u < acc) {
            return k;
        }
    }
    return w.size() - 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// StepDensity

StepDensity::StepDensity(std::vector<double> breakpoints, std::vector<double> heights)
    : breakpoints_(std::move(breakpoints)), heights_(std::move(heights))
{
    require_increasing(breakpoints_, "step breakpoints", 2);
    require(heights_.size() + 1 == breakpoints_.size(), "step density needs one height per interval");
    cum_.assign(breakpoints_.size(), 0.0);
    for (std::size_t j = 0; j < heights_.size(); ++j) {
        require(heights_[j] >= 0.0 && std::isfinite(heights_[j]), "step heights must be finite and nonnegative");
        if (j > 0) {
            require(heights_[j] <= heights_[j - 1] * (1.0 + 1e-12), "step heights must be nonincreasing");
        }
        cum_[j + 1] = cum_[j] + heights_[j] * (breakpoints_[j + 1] - breakpoints_[j]);
    }
    require(std::abs(cum_.back() - 1.0) <= 1e-10, "step density must integrate to 1 (got " +
                                                      format_double(cum_.back()) + ")");
}

double StepDensity::pdf(double x) const
{
    if (!(x > breakpoints_.front()) || x > breakpoints_.back()) {
        return 0.0;
    }
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return heights_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double StepDensity::cdf(double x) const
{
    if (x <= breakpoints_.front()) {
        return 0.0;
    }
    if (x >= breakpoints_.back()) {
        return 1.0;
    }
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return std::min(1.0, cum_[j] + heights_[j] * (x - breakpoints_[j]));
}

double StepDensity::quantile(double u) const
{
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorCode::UOutOfRange, "quantile level must lie in (0,1)");
    }
    const double target = u * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t j = std::min(static_cast<std::size_t>(it - cum_.begin()), heights_.size()) - 1;
    while (heights_[j] == 0.0 && j > 0) {
        --j;
    }
    double x = breakpoints_[j] + (target - cum_[j]) / heights_[j];
    return std::clamp(x, breakpoints_[j], breakpoints_[j + 1]);
}

double StepDensity::sample(RngStream& rng) const { return quantile(rng.uniform01()); }

// ---------------------------------------------------------------------------
// BetaKernelMixture

BetaKernelMixture::BetaKernelMixture(int k, std::vector<double> support_points, std::vector<double> weights)
    : k_(k), points_(std::move(support_points)), weights_(std::move(weights))
{
    require(k_ >= 1, "k must be at least 1");
    require_increasing(points_, "beta-kernel support points", 1);
    require(points_.front() > 0.0, "beta-kernel support points must be positive");
    require_simplex(weights_, points_.size());
}

double BetaKernelMixture::pdf(double x) const
{
    if (x < 0.0) {
        return 0.0;
    }
    double f = 0.0;
    for (std::size_t j = 0; j < points_.size(); ++j) {
        const double a = points_[j];
        const double t = 1.0 - x / a;
        if (t > 0.0) {
            f += weights_[j] * k_ / a * std::pow(t, k_ - 1);
        }
    }
    return f;
}

double BetaKernelMixture::cdf(double x) const
{
    if (x <= 0.0) {
        return 0.0;
    }
    double c = 0.0;
    for (std::size_t j = 0; j < points_.size(); ++j) {
        const double t = 1.0 - x / points_[j];
        c += weights_[j] * (t > 0.0 ? -std::expm1(k_ * std::log1p(-x / points_[j])) : 1.0);
    }
    return std::min(c, 1.0);
}

double BetaKernelMixture::quantile(double u) const
{
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorCode::UOutOfRange, "quantile level must lie in (0,1)");
    }
    return detail::bisect_quantile([this](double x) { return cdf(x); }, u, 0.0, points_.back());
}

double BetaKernelMixture::sample(RngStream& rng) const
{
    const double a = points_[pick_component(weights_, rng.uniform01())];
    // Component cdf 1 - (1 - x/a)^k inverted at U.
    return a * (1.0 - std::pow(rng.uniform01(), 1.0 / k_));
}

// ---------------------------------------------------------------------------
// ExpMixture

ExpMixture::ExpMixture(std::vector<double> rates, std::vector<double> weights)
    : rates_(std::move(rates)), weights_(std::move(weights))
{
    require_increasing(rates_, "exponential rates", 1);
    require(rates_.front() > 0.0, "exponential rates must be positive");
    require_simplex(weights_, rates_.size());
}

std::pair<double, double> ExpMixture::support() const { return {0.0, kInf}; }

double ExpMixture::pdf(double x) const
{
    if (x < 0.0) {
        return 0.0;
    }
    double f = 0.0;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        f += weights_[i] * rates_[i] * std::exp(-rates_[i] * x);
    }
    return f;
}

double ExpMixture::cdf(double x) const
{
    if (x <= 0.0) {
        return 0.0;
    }
    double c = 0.0;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        c -= weights_[i] * std::expm1(-rates_[i] * x);
    }
    return std::min(c, 1.0);
}

double ExpMixture::quantile(double u) const
{
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorCode::UOutOfRange, "quantile level must lie in (0,1)");
    }
    if (rates_.size() == 1) {
        return -std::log1p(-u) / rates_[0];
    }
    // Each component quantile brackets the mixture quantile.
    const double hi = -std::log1p(-u) / rates_.front();
    const double lo = -std::log1p(-u) / rates_.back();
    return detail::bisect_quantile([this](double x) { return cdf(x); }, u, lo, hi);
}

double ExpMixture::sample(RngStream& rng) const
{
    const double rate = rates_[pick_component(weights_, rng.uniform01())];
    return -std::log(rng.uniform01()) / rate;
}

// ---------------------------------------------------------------------------
// PiecewiseLogLinear

PiecewiseLogLinear::PiecewiseLogLinear(std::vector<double> knots, std::vector<double> phi)
    : knots_(std::move(knots)), phi_(std::move(phi))
{
    require_increasing(knots_, "log-linear knots", 2);
    require(phi_.size() == knots_.size(), "phi needs one value per knot");
    for (double v : phi_) {
        require(std::isfinite(v), "phi must be finite");
    }
    double prev_slope = kInf;
    cum_.assign(knots_.size(), 0.0);
    for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
        const double width = knots_[j + 1] - knots_[j];
        const double slope = (phi_[j + 1] - phi_[j]) / width;
        require(slope <= prev_slope + 1e-9 * (1.0 + std::abs(prev_slope)), "log density must be concave");
        prev_slope = slope;
        cum_[j + 1] = cum_[j] + width * detail::j00(phi_[j], phi_[j + 1]);
    }
    require(std::abs(cum_.back() - 1.0) <= 1e-8,
            "log-linear density must integrate to 1 (got " + format_double(cum_.back()) + ")");
}

double PiecewiseLogLinear::log_pdf(double x) const
{
    if (x < knots_.front() || x > knots_.back()) {
        return -kInf;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - knots_.begin());
    if (j >= knots_.size()) {
        return phi_.back();
    }
    --j;
    const double t = (x - knots_[j]) / (knots_[j + 1] - knots_[j]);
    return (1.0 - t) * phi_[j] + t * phi_[j + 1];
}

double PiecewiseLogLinear::pdf(double x) const
{
    const double lp = log_pdf(x);
    return std::isfinite(lp) ? std::exp(lp) : 0.0;
}

double PiecewiseLogLinear::cdf(double x) const
{
    if (x <= knots_.front()) {
        return 0.0;
    }
    if (x >= knots_.back()) {
        return 1.0;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double dx = x - knots_[j];
    return std::min(1.0, cum_[j] + dx * detail::j00(phi_[j], log_pdf(x)));
}

double PiecewiseLogLinear::quantile(double u) const
{
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorCode::UOutOfRange, "quantile level must lie in (0,1)");
    }
    const double target = u * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t j = std::min(static_cast<std::size_t>(it - cum_.begin()), knots_.size() - 1) - 1;
    const double width = knots_[j + 1] - knots_[j];
    const double slope = (phi_[j + 1] - phi_[j]) / width;
    return knots_[j] + detail::invert_segment(phi_[j], slope, width, target - cum_[j]);
}

double PiecewiseLogLinear::sample(RngStream& rng) const { return quantile(rng.uniform01()); }

// ---------------------------------------------------------------------------
// Density dispatch

std::string_view type_name(const Density& d)
{
    struct V {
        std::string_view operator()(const StepDensity&) const { return "step"; }
        std::string_view operator()(const BetaKernelMixture&) const { return "beta_kernel_mixture"; }
        std::string_view operator()(const ExpMixture&) const { return "exp_mixture"; }
        std::string_view operator()(const PiecewiseLogLinear&) const { return "piecewise_log_linear"; }
        std::string_view operator()(const ReferenceDistribution&) const { return "reference"; }
    };
    return std::visit(V{}, d);
}

double pdf_at(const Density& d, double x)
{
    return std::visit([x](const auto& v) { return v.pdf(x); }, d);
}

double cdf_at(const Density& d, double x)
{
    return std::visit([x](const auto& v) { return v.cdf(x); }, d);
}

double quantile(const Density& d, double u)
{
    return std::visit([u](const auto& v) { return v.quantile(u); }, d);
}

std::vector<double> sample_n(const Density& d, std::size_t n, RngStream& rng)
{
    std::vector<double> out(n);
    std::visit(
        [&](const auto& v) {
            for (auto& x : out) {
                x = v.sample(rng);
            }
        },
        d);
    return out;
}

std::pair<double, double> support(const Density& d)
{
    return std::visit([](const auto& v) { return v.support(); }, d);
}

void pdf_many(const Density& d, std::span<const double> x, std::span<double> out)
{
    if (const auto* bk = std::get_if<BetaKernelMixture>(&d)) {
        const auto& a = bk->support_points();
        std::vector<double> inv_a(a.size()), coef(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            inv_a[j] = 1.0 / a[j];
            coef[j] = bk->weights()[j] * bk->k() / a[j];
        }
        kernels::truncated_power_sum(x, inv_a, coef, bk->k() - 1, out);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < 0.0) {
                out[i] = 0.0;
            }
        }
        return;
    }
    if (const auto* em = std::get_if<ExpMixture>(&d)) {
        const auto& r = em->rates();
        std::vector<double> coef(r.size());
        for (std::size_t j = 0; j < r.size(); ++j) {
            coef[j] = em->weights()[j] * r[j];
        }
        kernels::exp_sum(x, r, coef, out);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < 0.0) {
                out[i] = 0.0;
            }
        }
        return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = pdf_at(d, x[i]);
    }
}

}  // namespace shapetest

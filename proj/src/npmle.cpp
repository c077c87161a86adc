#include "shapetest/npmle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "npmle_internal.hpp"
#include "shapetest/error.hpp"
#include "shapetest/format.hpp"
#include "shapetest/kernels.hpp"

namespace shapetest {

void SolverConfig::validate() const
{
    if (!(tol_gap > 0.0) || max_iter <= 0 || grid_size <= 0 || grid_refinements <= 0) {
        throw Error(ErrorCode::InvalidArgument, "solver settings must all be positive");
    }
}

HypothesisClass HypothesisClass::k_monotone(int k)
{
    if (k < 1) {
        throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    }
    if (k == 1) {
        return monotone();
    }
    return {Kind::KMonotone, k};
}

HypothesisClass HypothesisClass::parse(std::string_view text)
{
    if (text == "monotone" || text == "decreasing") {
        return monotone();
    }
    if (text == "cm" || text == "completely_monotone") {
        return completely_monotone();
    }
    if (text == "logconcave" || text == "log_concave") {
        return log_concave();
    }
    for (std::string_view prefix : {"kmono:", "k_monotone:"}) {
        if (text.starts_with(prefix)) {
            std::string_view digits = text.substr(prefix.size());
            int k = 0;
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
            if (ec != std::errc{} || ptr != digits.data() + digits.size() || k < 1) {
                throw Error(ErrorCode::InvalidArgument, "bad k in class '" + std::string(text) + "'");
            }
            return k_monotone(k);
        }
    }
    throw Error(ErrorCode::InvalidArgument,
                "unknown class '" + std::string(text) + "' (expected monotone, kmono:K, cm or logconcave)");
}

std::string HypothesisClass::to_string() const
{
    switch (kind) {
    case Kind::Monotone: return "monotone";
    case Kind::KMonotone: return "kmono:" + std::to_string(k);
    case Kind::CompletelyMonotone: return "cm";
    case Kind::LogConcave: return "logconcave";
    }
    return "?";
}

Fit<StepDensity> fit_grenander(const SortedSample& s)
{
    if (!s.tau()) {
        throw Error(ErrorCode::MissingTau, "the Grenander estimator needs the left endpoint tau");
    }
    const auto z = s.z();
    const std::size_t n = z.size();
    const double tau = *s.tau();
    auto at = [&](std::size_t i) { return i == 0 ? tau : z[i - 1]; };  // vertex abscissae
    auto slope = [&](std::size_t a, std::size_t b) {
        return static_cast<double>(b - a) / static_cast<double>(n) / (at(b) - at(a));
    };

    // Blocks of the LCM as vertex index ranges [start, end].
    struct Block {
        std::size_t start, end;
        double height;
    };
    std::vector<Block> stack;
    stack.reserve(n);
    int merges = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        Block cur{i - 1, i, slope(i - 1, i)};
        while (!stack.empty() && stack.back().height <= cur.height) {
            cur = Block{stack.back().start, cur.end, slope(stack.back().start, cur.end)};
            stack.pop_back();
            ++merges;
        }
        stack.push_back(cur);
    }

    std::vector<double> breakpoints(n + 1);
    std::vector<double> heights(n);
    for (std::size_t i = 0; i <= n; ++i) {
        breakpoints[i] = at(i);
    }
    for (const Block& b : stack) {
        std::fill(heights.begin() + static_cast<std::ptrdiff_t>(b.start),
                  heights.begin() + static_cast<std::ptrdiff_t>(b.end), b.height);
    }

    FitReport report;
    report.loglik = kernels::sum_log(heights);
    report.iterations = merges;
    report.optimality_gap = 0.0;
    report.converged = true;
    report.support_size = stack.size();
    return {StepDensity(std::move(breakpoints), std::move(heights)), report};
}

namespace {

void require_positive(const SortedSample& s)
{
    if (!(s.front() > 0.0)) {
        throw Error(ErrorCode::NonPositiveObservation,
                    "observations must be positive for this class (smallest is " + format_double(s.front()) + ")", 0);
    }
}

void require_zero_tau(const SortedSample& s, const HypothesisClass& cls)
{
    if (s.tau() && *s.tau() != 0.0) {
        throw Error(ErrorCode::InvalidClassTauCombination,
                    "class " + cls.to_string() + " is defined on (0, inf); tau must be 0");
    }
}

// Directional derivative towards uniform densities on (tau, Z_j]; the
// Grenander estimator is their best mixture, so this is <= 0 up to rounding.
double step_gap(const StepDensity& f, const SortedSample& s)
{
    const auto z = s.z();
    const double tau = f.breakpoints().front();
    const double n = static_cast<double>(z.size());
    double inv_sum = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double fx = f.pdf(z[j]);
        if (!(fx > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        inv_sum += 1.0 / fx;
        best = std::max(best, inv_sum / (n * (z[j] - tau)) - 1.0);
    }
    // Rounding floor: the certificate is exactly zero in exact arithmetic.
    return best > 1e-12 ? best : 0.0;
}

}  // namespace

FittedDensity fit_class(const SortedSample& s, const HypothesisClass& cls, const SolverConfig& cfg)
{
    switch (cls.kind) {
    case HypothesisClass::Kind::Monotone: {
        auto fit = fit_grenander(s);
        return {std::move(fit.density), fit.report};
    }
    case HypothesisClass::Kind::KMonotone: {
        require_zero_tau(s, cls);
        auto fit = fit_k_monotone(s, cls.k, cfg);
        return {std::move(fit.density), fit.report};
    }
    case HypothesisClass::Kind::CompletelyMonotone: {
        require_zero_tau(s, cls);
        auto fit = fit_completely_monotone(s, cfg);
        return {std::move(fit.density), fit.report};
    }
    case HypothesisClass::Kind::LogConcave: {
        auto fit = fit_log_concave(s, cfg);
        return {std::move(fit.density), fit.report};
    }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown class");
}

double optimality_gap(const Density& fit, const SortedSample& s, const HypothesisClass& cls, const SolverConfig& cfg)
{
    auto mismatch = [&] {
        return Error(ErrorCode::ClassMismatch,
                     std::string(type_name(fit)) + " fit does not belong to class " + cls.to_string());
    };
    switch (cls.kind) {
    case HypothesisClass::Kind::Monotone:
        if (const auto* f = std::get_if<StepDensity>(&fit)) {
            return step_gap(*f, s);
        }
        throw mismatch();
    case HypothesisClass::Kind::KMonotone:
        if (const auto* f = std::get_if<BetaKernelMixture>(&fit); f && f->k() == cls.k) {
            require_positive(s);
            return detail::beta_mixture_gap(*f, s.z(), cfg);
        }
        throw mismatch();
    case HypothesisClass::Kind::CompletelyMonotone:
        if (const auto* f = std::get_if<ExpMixture>(&fit)) {
            require_positive(s);
            return detail::exp_mixture_gap(*f, s.z(), cfg);
        }
        throw mismatch();
    case HypothesisClass::Kind::LogConcave:
        if (const auto* f = std::get_if<PiecewiseLogLinear>(&fit)) {
            return detail::log_concave_gap(*f, s.z());
        }
        throw mismatch();
    }
    throw mismatch();
}

void require_converged(const FitReport& report)
{
    if (!report.converged) {
        throw Error(ErrorCode::NotConverged, "solver stopped after " + std::to_string(report.iterations) +
                                                 " iterations with gap " + format_double(report.optimality_gap));
    }
}

}  // namespace shapetest

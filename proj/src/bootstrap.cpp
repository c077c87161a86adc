#include "shapetest/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "shapetest/error.hpp"
#include "shapetest/format.hpp"
#include "shapetest/nplrt.hpp"
#include "shapetest/parallel.hpp"

namespace shapetest {

namespace {

bool belongs(const Density& fit, const HypothesisClass& cls)
{
    switch (cls.kind) {
    case HypothesisClass::Kind::Monotone: return std::holds_alternative<StepDensity>(fit);
    case HypothesisClass::Kind::KMonotone: {
        const auto* f = std::get_if<BetaKernelMixture>(&fit);
        return f && f->k() == cls.k;
    }
    case HypothesisClass::Kind::CompletelyMonotone: return std::holds_alternative<ExpMixture>(fit);
    case HypothesisClass::Kind::LogConcave: return std::holds_alternative<PiecewiseLogLinear>(fit);
    }
    return false;
}

std::optional<double> replicate(const Density& fit, std::size_t n, const HypothesisClass& cls, double tau,
                                std::uint64_t base_seed, std::size_t b, const SolverConfig& cfg)
{
    RngStream rng = RngStream::derive(base_seed, {b});
    std::vector<double> draws = sample_n(fit, n, rng);
    std::sort(draws.begin(), draws.end());
    try {
        const SortedSample s(std::move(draws), tau);
        FittedDensity refit = fit_class(s, cls, cfg);
        if (!refit.report.converged) {
            SolverConfig retry = cfg;
            retry.max_iter *= 2;
            refit = fit_class(s, cls, retry);
            if (!refit.report.converged) {
                return std::nullopt;
            }
        }
        const double lam = lambda_n(s, refit.density);
        return std::isfinite(lam) ? std::optional<double>(lam) : std::nullopt;
    } catch (const Error&) {
        // Ties or support-boundary draws: rare, counted as failures.
        return std::nullopt;
    }
}

}  // namespace

BootstrapDistribution bootstrap_lambdas(const Density& fit, std::size_t n, const HypothesisClass& cls, std::size_t B,
                                        std::uint64_t base_seed, const SolverConfig& cfg, unsigned workers)
{
    if (B == 0) {
        throw Error(ErrorCode::InvalidArgument, "bootstrap needs B >= 1");
    }
    if (n == 0) {
        throw Error(ErrorCode::TooFewObservations, "bootstrap needs n >= 1");
    }
    if (!belongs(fit, cls)) {
        throw Error(ErrorCode::ClassMismatch,
                    std::string(type_name(fit)) + " fit does not belong to class " + cls.to_string());
    }
    const double tau = support(fit).first;

    std::vector<std::optional<double>> slots(B);
    parallel_for(B, workers, [&](std::size_t i) {
        slots[i] = replicate(fit, n, cls, tau, base_seed, i + 1, cfg);
    });

    BootstrapDistribution bd;
    bd.B = B;
    bd.base_seed = base_seed;
    for (const auto& v : slots) {
        if (v) {
            bd.lambdas.push_back(*v);
        } else {
            ++bd.failures;
        }
    }
    if (static_cast<double>(bd.failures) > 0.05 * static_cast<double>(B)) {
        throw Error(ErrorCode::TooManyFailures, std::to_string(bd.failures) + " of " + std::to_string(B) +
                                                    " bootstrap replicates failed");
    }
    return bd;
}

double bootstrap_critical_value(const BootstrapDistribution& bd, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0,1), got " + format_double(alpha));
    }
    if (bd.lambdas.empty()) {
        throw Error(ErrorCode::InvalidArgument, "bootstrap distribution is empty");
    }
    std::vector<double> sorted = bd.lambdas;
    std::sort(sorted.begin(), sorted.end());
    const double b = static_cast<double>(sorted.size());
    // The small offset keeps exact products such as 0.95 * 200 from rounding up.
    double rank = std::ceil((1.0 - alpha) * (b + 1.0) - 1e-9);
    rank = std::clamp(rank, 1.0, b);
    return sorted[static_cast<std::size_t>(rank) - 1];
}

double bootstrap_p_value(double lambda_obs, const BootstrapDistribution& bd)
{
    if (bd.lambdas.empty()) {
        throw Error(ErrorCode::InvalidArgument, "bootstrap distribution is empty");
    }
    const auto count = std::count_if(bd.lambdas.begin(), bd.lambdas.end(), [&](double v) { return v >= lambda_obs; });
    return (1.0 + static_cast<double>(count)) / (static_cast<double>(bd.lambdas.size()) + 1.0);
}

}  // namespace shapetest

#include "shapetest/nplrt.hpp"

#include <algorithm>
#include <cmath>

#include "shapetest/bootstrap.hpp"
#include "shapetest/error.hpp"
#include "shapetest/format.hpp"

namespace shapetest {

std::string_view to_string(StatisticVariant v)
{
    return v == StatisticVariant::WithTau ? "with_tau" : "tau_free";
}

std::string_view to_string(Method m)
{
    return m == Method::Asymptotic ? "asymptotic" : "bootstrap";
}

Method parse_method(std::string_view text)
{
    if (text == "asymptotic") {
        return Method::Asymptotic;
    }
    if (text == "bootstrap") {
        return Method::Bootstrap;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(text) + "'");
}

namespace {

std::vector<double> density_at_data(const SortedSample& s, const Density& fit)
{
    std::vector<double> f(s.n());
    pdf_many(fit, s.z(), f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] > 0.0) || !std::isfinite(f[i])) {
            throw Error(ErrorCode::ZeroDensityAtObservation,
                        "density is " + format_double(f[i]) + " at observation " + format_double(s.z()[i]), i);
        }
    }
    return f;
}

}  // namespace

double lambda_n(const SortedSample& s, const Density& fit)
{
    const std::vector<double> gaps = spacings(s, true);
    const std::vector<double> f = density_at_data(s, fit);
    const double n = static_cast<double>(s.n());
    // Pairing f(Z_i) with its spacing keeps every log argument O(1/n).
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        acc += std::log(n * f[i] * gaps[i]);
    }
    return -acc / n;
}

double lambda_n_prime(const SortedSample& s, const Density& fit)
{
    if (s.n() < 2) {
        throw Error(ErrorCode::TooFewObservations, "the tau-free statistic needs at least two observations");
    }
    const std::vector<double> gaps = spacings(s, false);
    const std::vector<double> f = density_at_data(s, fit);
    const double n = static_cast<double>(s.n());
    double log_f = 0.0, log_gap = 0.0;
    for (double v : f) {
        log_f += std::log(v);
    }
    for (double g : gaps) {
        log_gap += std::log(n * g);
    }
    return -log_f / n - log_gap / (n - 1.0);
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

Standardized standardize(double lambda, std::size_t n)
{
    if (n == 0) {
        throw Error(ErrorCode::TooFewObservations, "standardization needs n >= 1");
    }
    const double z = std::sqrt(static_cast<double>(n)) * (lambda - kEulerGamma) / std::sqrt(kNullVariance);
    return {z, normal_upper_tail(z)};
}

NullDecomposition decompose(const SortedSample& s, const Density& fit, const Density& f0)
{
    if (!s.tau()) {
        throw Error(ErrorCode::MissingTau, "the decomposition needs tau");
    }
    const auto z = s.z();
    const std::vector<double> gaps = spacings(s, true);
    const std::vector<double> fhat = density_at_data(s, fit);
    const std::vector<double> f0v = density_at_data(s, f0);
    const double n = static_cast<double>(s.n());

    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    double prev_cdf = cdf_at(f0, *s.tau());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = cdf_at(f0, z[i]);
        const double dF = cdf - prev_cdf;
        if (!(dF > 0.0)) {
            throw Error(ErrorCode::DegenerateF0Spacing,
                        "null cdf does not increase across spacing " + std::to_string(i + 1), i);
        }
        s1 += std::log(fhat[i] / f0v[i]);
        s2 += std::log(dF * n) + kEulerGamma;
        s3 += std::log(f0v[i] * gaps[i] / dF);
        prev_cdf = cdf;
    }
    const double root = std::sqrt(n);
    NullDecomposition d;
    d.s1 = -s1 / root;
    d.s2 = -s2 / root;
    d.s3 = -s3 / root;
    d.sum_check = std::abs(d.s1 + d.s2 + d.s3 - root * (lambda_n(s, fit) - kEulerGamma));
    return d;
}

bool TestResult::rejects(double alpha) const
{
    for (const auto& [a, r] : reject_at) {
        if (a == alpha) {
            return r;
        }
    }
    throw Error(ErrorCode::AlphaOutOfRange, "alpha " + format_double(alpha) + " was not evaluated");
}

TestResult run_test(const RawSample& raw, const TestOptions& opts)
{
    const HypothesisClass& cls = opts.cls;
    for (double a : opts.alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0,1), got " + format_double(a));
        }
    }
    if (cls.monotone_family() && !opts.tau) {
        throw Error(ErrorCode::InvalidClassTauCombination,
                    "class " + cls.to_string() + " needs a known left endpoint tau (use 0)");
    }
    const bool on_half_line = cls.kind == HypothesisClass::Kind::KMonotone ||
                              cls.kind == HypothesisClass::Kind::CompletelyMonotone;
    if (on_half_line) {
        if (*opts.tau != 0.0) {
            throw Error(ErrorCode::InvalidClassTauCombination, "class " + cls.to_string() + " requires tau = 0");
        }
        for (std::size_t i = 0; i < raw.values.size(); ++i) {
            if (!(raw.values[i] > 0.0)) {
                throw Error(ErrorCode::NonPositiveObservation,
                            "observation " + format_double(raw.values[i]) + " is not positive", i);
            }
        }
    }

    RngStream tie_rng = RngStream::derive(opts.seed, {0});
    const SortedSample s = to_sorted(raw, opts.tau, opts.ties, &tie_rng);

    TestResult result{cls, opts.method, {}, {}, fit_class(s, cls, opts.solver), std::nullopt, opts.seed};

    TestStatistic& st = result.statistic;
    st.n = s.n();
    if (s.tau() && !opts.tau_free) {
        st.variant = StatisticVariant::WithTau;
        st.lambda = lambda_n(s, result.fit.density);
    } else {
        st.variant = StatisticVariant::TauFree;
        st.lambda = lambda_n_prime(s, result.fit.density);
    }
    const Standardized zs = standardize(st.lambda, st.n);
    st.z = zs.z;
    st.p_value = zs.p;

    if (opts.method == Method::Asymptotic) {
        for (double a : opts.alphas) {
            result.reject_at.emplace_back(a, st.p_value < a);
        }
    } else {
        const BootstrapDistribution bd =
            bootstrap_lambdas(result.fit.density, s.n(), cls, opts.B, opts.seed, opts.solver, opts.workers);
        BootstrapSummary summary;
        summary.B = bd.B;
        summary.failures = bd.failures;
        summary.base_seed = bd.base_seed;
        summary.p_value = bootstrap_p_value(st.lambda, bd);
        for (double a : opts.alphas) {
            const double crit = bootstrap_critical_value(bd, a);
            summary.critical_values.emplace_back(a, crit);
            result.reject_at.emplace_back(a, st.lambda > crit);
        }
        result.bootstrap = std::move(summary);
    }
    return result;
}

}  // namespace shapetest

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "shapetest/density.hpp"
#include "shapetest/npmle.hpp"
#include "shapetest/samples.hpp"

namespace shapetest {

inline constexpr double kEulerGamma = 0.5772156649015329;
// Limiting variance of sqrt(n) (Lambda_n - gamma): pi^2/6 - 1.
inline constexpr double kNullVariance = 0.6449340668482264;

enum class StatisticVariant { WithTau, TauFree };
enum class Method { Asymptotic, Bootstrap };

std::string_view to_string(StatisticVariant v);
std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct TestStatistic {
    double lambda = 0.0;
    StatisticVariant variant = StatisticVariant::WithTau;
    std::size_t n = 0;
    double z = 0.0;
    double p_value = 0.0;  // asymptotic, upper tail
};

struct NullDecomposition {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    double sum_check = 0.0;  // |s1 + s2 + s3 - sqrt(n) (Lambda_n - gamma)|
};

struct Standardized {
    double z;
    double p;
};

// -(1/n) sum log f(Z_i) - (1/n) sum_{i=1..n} log(Z_i - Z_{i-1}) - log n, Z_0 = tau.
double lambda_n(const SortedSample& s, const Density& fit);

// Same without the Z_0 spacing: the spacing average runs over i = 2..n.
double lambda_n_prime(const SortedSample& s, const Density& fit);

// Standard-normal upper tail 1 - Phi(z).
double normal_upper_tail(double z);

Standardized standardize(double lambda, std::size_t n);

NullDecomposition decompose(const SortedSample& s, const Density& fit, const Density& f0);

struct BootstrapSummary {
    std::size_t B = 0;
    std::size_t failures = 0;
    std::vector<std::pair<double, double>> critical_values;  // (alpha, value)
    double p_value = 0.0;
    std::uint64_t base_seed = 0;
};

struct TestOptions {
    HypothesisClass cls = HypothesisClass::monotone();
    std::optional<double> tau;  // required for monotone-family classes
    Method method = Method::Asymptotic;
    bool tau_free = false;       // force Lambda_n' even when tau is known
    SolverConfig solver;
    std::size_t B = 500;
    std::vector<double> alphas{0.01, 0.05, 0.10};
    TiePolicy ties;
    std::uint64_t seed = 0;
    unsigned workers = 1;  // bootstrap replicates; 0 = default_workers()
};

struct TestResult {
    HypothesisClass cls;
    Method method = Method::Asymptotic;
    TestStatistic statistic;
    std::vector<std::pair<double, bool>> reject_at;  // (alpha, reject)
    FittedDensity fit;
    std::optional<BootstrapSummary> bootstrap;
    std::uint64_t seed = 0;

    bool rejects(double alpha) const;
};

// Sort, fit the class MLE, compute Lambda_n (known tau, monotone-family or
// explicit tau) or Lambda_n' (otherwise), standardize, and optionally
// calibrate by bootstrap from the fit.
TestResult run_test(const RawSample& raw, const TestOptions& opts);

}  // namespace shapetest

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shapetest/nplrt.hpp"
#include "test_util.hpp"

using namespace shapetest;
using testutil::sorted;

namespace {

const Density kUnit = StepDensity({0.0, 1.0}, {1.0});

}  // namespace

TEST(LambdaN, TwoPointExample)
{
    const SortedSample s({0.25, 0.75}, 0.0);
    EXPECT_NEAR(lambda_n(s, kUnit), -0.5 * (std::log(0.25) + std::log(0.5)) - std::log(2.0), 1e-15);
    EXPECT_NEAR(lambda_n(s, kUnit), 0.34657, 1e-5);
    EXPECT_NEAR(lambda_n_prime(s, kUnit), 0.0, 1e-15);
}

TEST(LambdaN, GrenanderHandFormula)
{
    const SortedSample s({1.0, 2.0, 4.0}, 0.0);
    const auto fit = fit_grenander(s);
    const double loglik = 2 * std::log(1.0 / 3) + std::log(1.0 / 6);
    const double with_tau = -loglik / 3 - (std::log(1.0) + std::log(1.0) + std::log(2.0)) / 3 - std::log(3.0);
    const double tau_free = -loglik / 3 - (std::log(1.0) + std::log(2.0)) / 2 - std::log(3.0);
    EXPECT_NEAR(lambda_n(s, fit.density), with_tau, 1e-14);
    EXPECT_NEAR(lambda_n_prime(s, fit.density), tau_free, 1e-14);
}

TEST(LambdaN, Errors)
{
    EXPECT_CODE(lambda_n(SortedSample({0.5, 1.5}, 0.0), kUnit), ErrorCode::ZeroDensityAtObservation);
    EXPECT_CODE(lambda_n(SortedSample({0.5, 0.7}, std::nullopt), kUnit), ErrorCode::MissingTau);
    EXPECT_THROW(lambda_n_prime(SortedSample({0.5}, 0.0), kUnit), Error);
    try {
        lambda_n(SortedSample({0.5, 1.5}, 0.0), kUnit);
    } catch (const Error& e) {
        EXPECT_EQ(e.index(), std::optional<std::size_t>(1));
    }
}

TEST(Standardize, Examples)
{
    EXPECT_EQ(kEulerGamma, 0.5772156649015329);
    EXPECT_NEAR(kNullVariance, std::numbers::pi * std::numbers::pi / 6 - 1, 1e-16);
    const auto zero = standardize(kEulerGamma, 37);
    EXPECT_EQ(zero.z, 0.0);
    EXPECT_EQ(zero.p, 0.5);
    for (std::size_t n : {1u, 100u, 5000u}) {
        const auto one = standardize(kEulerGamma + std::sqrt(kNullVariance / n), n);
        EXPECT_NEAR(one.z, 1.0, 1e-12);
        EXPECT_NEAR(one.p, 0.15865525393145707, 1e-12);
    }
}

TEST(Standardize, UpperTailAccuracy)
{
    // Reference values of 1 - Phi(z).
    const std::pair<double, double> ref[] = {
        {-3.0, 0.9986501019683699}, {0.5, 0.3085375387259869},   {1.6448536269514722, 0.05},
        {3.0, 0.0013498980316301},  {6.0, 9.865876450376982e-10}, {8.0, 6.220960574271785e-16},
    };
    for (const auto& [z, p] : ref) {
        EXPECT_NEAR(normal_upper_tail(z) / p, 1.0, 1e-12) << z;
    }
}

TEST(Decompose, IdentityOnRandomCases)
{
    RngStream seeds(99);
    const char* specs[] = {"Exp(1)", "Beta(1,2)", "HalfNormal(2)", "Unif(0,1)"};
    const char* nulls[] = {"Exp(1)", "Exp(0.5)", "HalfNormal(1)", "Unif(0,1.5)"};
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = sorted(specs[trial % 4], 20 + trial, seeds(), 0.0);
        const Density f0 = realize(parse_spec(nulls[trial % 4]));
        const auto fit = fit_grenander(s);
        const auto d = decompose(s, fit.density, f0);
        const double target = std::sqrt(static_cast<double>(s.n())) * (lambda_n(s, fit.density) - kEulerGamma);
        EXPECT_NEAR(d.s1 + d.s2 + d.s3, target, 1e-8) << trial;
        EXPECT_LE(d.sum_check, 1e-8) << trial;
        // The MLE dominates any class member on the same sample.
        EXPECT_LE(d.s1, 1e-12) << trial;
    }
}

TEST(Decompose, ExactZeros)
{
    const auto s = sorted("Unif(0,1)", 50, 5, 0.0);
    const auto d = decompose(s, kUnit, kUnit);
    EXPECT_EQ(d.s1, 0.0);
    EXPECT_NEAR(d.s3, 0.0, 1e-13);

    const Density f0 = realize(parse_spec("Exp(1)"));
    const auto e = sorted("Exp(1)", 40, 6, 0.0);
    EXPECT_EQ(decompose(e, f0, f0).s1, 0.0);
}

TEST(Decompose, Errors)
{
    const SortedSample s({0.5, 1.5}, 0.0);
    EXPECT_CODE(decompose(s, StepDensity({0.0, 2.0}, {0.5}), kUnit), ErrorCode::ZeroDensityAtObservation);
    EXPECT_CODE(decompose(SortedSample({0.5}, std::nullopt), kUnit, kUnit), ErrorCode::MissingTau);
    // Far in the tail the null cdf rounds to 1 on both sides of a spacing.
    const Density f0 = realize(parse_spec("Exp(1)"));
    EXPECT_CODE(decompose(SortedSample({50.0, 50.5}, 0.0), StepDensity({0.0, 51.0}, {1.0 / 51}), f0),
                ErrorCode::DegenerateF0Spacing);
}

TEST(LambdaN, ScaleInvarianceForMonotone)
{
    RngStream seeds(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = sorted("Exp(1)", 100, seeds(), 0.0);
        const double base = lambda_n(s, fit_grenander(s).density);
        for (double c : {1e-3, 0.37, 2.0, 1e4}) {
            std::vector<double> scaled(s.z().begin(), s.z().end());
            for (double& x : scaled) {
                x *= c;
            }
            const SortedSample t(scaled, 0.0);
            EXPECT_NEAR(lambda_n(t, fit_grenander(t).density), base, 1e-10) << c;
        }
    }
}

TEST(RunTest, StatisticSelection)
{
    RawSample raw{testutil::draws("Exp(1)", 60, 3)};
    TestOptions o;
    o.tau = 0.0;
    const auto a = run_test(raw, o);
    EXPECT_EQ(a.statistic.variant, StatisticVariant::WithTau);
    EXPECT_EQ(a.statistic.n, 60u);
    const auto s = to_sorted(raw, 0.0);
    EXPECT_EQ(a.statistic.lambda, lambda_n(s, a.fit.density));
    const auto st = standardize(a.statistic.lambda, 60);
    EXPECT_EQ(a.statistic.z, st.z);
    EXPECT_EQ(a.statistic.p_value, st.p);
    for (const auto& [alpha, rej] : a.reject_at) {
        EXPECT_EQ(rej, a.statistic.p_value < alpha);
    }
    ASSERT_EQ(a.reject_at.size(), 3u);

    o.tau_free = true;
    const auto b = run_test(raw, o);
    EXPECT_EQ(b.statistic.variant, StatisticVariant::TauFree);
    EXPECT_EQ(b.statistic.lambda, lambda_n_prime(s, b.fit.density));

    TestOptions lc;
    lc.cls = HypothesisClass::log_concave();
    const auto c = run_test(RawSample{testutil::draws("Normal(0,1)", 60, 3)}, lc);
    EXPECT_EQ(c.statistic.variant, StatisticVariant::TauFree);
    EXPECT_TRUE(std::holds_alternative<PiecewiseLogLinear>(c.fit.density));
}

TEST(RunTest, ClassAndTauRules)
{
    RawSample raw{{0.3, 1.1, 2.0}};
    TestOptions o;
    EXPECT_CODE(run_test(raw, o), ErrorCode::InvalidClassTauCombination);
    o.cls = HypothesisClass::k_monotone(2);
    o.tau = 0.5;
    EXPECT_CODE(run_test(raw, o), ErrorCode::InvalidClassTauCombination);
    o.tau = 0.0;
    EXPECT_CODE(run_test(RawSample{{-0.3, 1.1, 2.0}}, o), ErrorCode::NonPositiveObservation);
    o.cls = HypothesisClass::monotone();
    o.tau = 0.3;
    EXPECT_CODE(run_test(raw, o), ErrorCode::TauNotBelowMinimum);
    o.tau = 0.0;
    o.alphas = {0.0};
    EXPECT_CODE(run_test(raw, o), ErrorCode::AlphaOutOfRange);
    o.alphas = {0.05};
    EXPECT_CODE(run_test(RawSample{{0.3, 0.3, 2.0}}, o), ErrorCode::TiesDetected);
    o.ties = TiePolicy::jitter(1e-9);
    EXPECT_NO_THROW(run_test(RawSample{{0.3, 0.3, 2.0}}, o));
}

TEST(RunTest, Deterministic)
{
    RawSample raw{testutil::draws("Exp(1)", 40, 8)};
    raw.values.push_back(raw.values[0]);
    TestOptions o;
    o.tau = 0.0;
    o.method = Method::Bootstrap;
    o.B = 40;
    o.seed = 1234;
    o.ties = TiePolicy::jitter(1e-6);
    const auto a = run_test(raw, o);
    const auto b = run_test(raw, o);
    EXPECT_EQ(a.statistic.lambda, b.statistic.lambda);
    ASSERT_TRUE(a.bootstrap && b.bootstrap);
    EXPECT_EQ(a.bootstrap->critical_values, b.bootstrap->critical_values);
    EXPECT_EQ(a.bootstrap->p_value, b.bootstrap->p_value);
    EXPECT_EQ(a.bootstrap->base_seed, 1234u);
    for (const auto& [alpha, rej] : a.reject_at) {
        double crit = NAN;
        for (const auto& [ca, cv] : a.bootstrap->critical_values) {
            if (ca == alpha) {
                crit = cv;
            }
        }
        EXPECT_EQ(rej, a.statistic.lambda > crit);
    }
}

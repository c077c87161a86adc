#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "shapetest/density.hpp"
#include "shapetest/samples.hpp"

namespace shapetest {

struct SolverConfig {
    double tol_gap = 1e-6;
    int max_iter = 500;
    int grid_size = 1000;
    int grid_refinements = 3;

    void validate() const;
};

// Certificate attached to every fit. `optimality_gap` is the largest
// directional derivative of the normalized log-likelihood over the class's
// candidate directions; zero for the closed-form Grenander estimator.
struct FitReport {
    double loglik = 0.0;
    int iterations = 0;
    double optimality_gap = 0.0;
    bool converged = false;
    std::size_t support_size = 0;
};

struct HypothesisClass {
    enum class Kind { Monotone, KMonotone, CompletelyMonotone, LogConcave };

    Kind kind = Kind::Monotone;
    int k = 1;  // KMonotone only

    static HypothesisClass monotone() { return {Kind::Monotone, 1}; }
    static HypothesisClass k_monotone(int k);
    static HypothesisClass completely_monotone() { return {Kind::CompletelyMonotone, 0}; }
    static HypothesisClass log_concave() { return {Kind::LogConcave, 0}; }

    // Accepts monotone, kmono:K, k_monotone:K, cm, completely_monotone,
    // logconcave, log_concave.
    static HypothesisClass parse(std::string_view text);
    std::string to_string() const;

    // Densities on [0, inf) that are nonincreasing: monotone, k-monotone, CM.
    bool monotone_family() const { return kind != Kind::LogConcave; }

    friend bool operator==(const HypothesisClass&, const HypothesisClass&) = default;
};

template <class D>
struct Fit {
    D density;
    FitReport report;
};

struct FittedDensity {
    Density density;
    FitReport report;
};

// Left derivative of the least concave majorant of the empirical cdf on
// [tau, Z_n], one height per spacing. Requires tau.
Fit<StepDensity> fit_grenander(const SortedSample& s);

// Support reduction over beta kernels k (a - x)_+^{k-1} / a^k with atoms in
// (Z_1, k Z_n]. Requires positive data and tau absent or 0, k >= 2.
Fit<BetaKernelMixture> fit_k_monotone(const SortedSample& s, int k, const SolverConfig& cfg = {});

// Exponential scale mixture with rates in [1/Z_n, 1/Z_1], fitted by the same
// support-reduction scheme. Requires positive data and tau absent or 0.
Fit<ExpMixture> fit_completely_monotone(const SortedSample& s, const SolverConfig& cfg = {});

// Log-concave MLE by an active-set method over knots at the observations.
// tau is ignored.
Fit<PiecewiseLogLinear> fit_log_concave(const SortedSample& s, const SolverConfig& cfg = {});

FittedDensity fit_class(const SortedSample& s, const HypothesisClass& cls, const SolverConfig& cfg = {});

// Recomputes the class certificate for `fit` on a fresh, denser candidate
// grid. Throws ClassMismatch when the density type does not belong to `cls`.
double optimality_gap(const Density& fit, const SortedSample& s, const HypothesisClass& cls,
                      const SolverConfig& cfg = {});

// Throws NotConverged when report.converged is false.
void require_converged(const FitReport& report);

}  // namespace shapetest

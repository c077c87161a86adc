#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "shapetest/density.hpp"
#include "shapetest/npmle.hpp"

namespace shapetest {

struct BootstrapDistribution {
    std::vector<double> lambdas;  // successful replicates, in replicate order
    std::size_t B = 0;
    std::uint64_t base_seed = 0;
    std::size_t failures = 0;
};

// Replicate b = 1..B draws n points from `fit` with stream (base_seed, b),
// refits `cls`, and evaluates Lambda_n with Z_0 at the left end of the fitted
// density's support. A refit that does not converge is retried once with
// twice the iteration budget before counting as a failure.
// Throws ClassMismatch, InvalidArgument (B = 0) or TooManyFailures (> 5%).
BootstrapDistribution bootstrap_lambdas(const Density& fit, std::size_t n, const HypothesisClass& cls, std::size_t B,
                                        std::uint64_t base_seed, const SolverConfig& cfg = {}, unsigned workers = 1);

// Sorted value at rank ceil((1 - alpha)(B + 1)), clamped to [1, B].
double bootstrap_critical_value(const BootstrapDistribution& bd, double alpha);

// (1 + #{lambda_b >= lambda_obs}) / (B_eff + 1).
double bootstrap_p_value(double lambda_obs, const BootstrapDistribution& bd);

}  // namespace shapetest

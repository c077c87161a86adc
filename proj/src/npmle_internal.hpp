#pragma once

#include <span>
#include <vector>

#include "shapetest/density.hpp"
#include "shapetest/npmle.hpp"

namespace shapetest::detail {

// Largest directional derivative sup_theta (1/n) sum_i g_theta(x_i)/f(x_i) - 1
// over the admissible atoms, searched on a grid denser than the solver's.
double beta_mixture_gap(const BetaKernelMixture& f, std::span<const double> x, const SolverConfig& cfg);
double exp_mixture_gap(const ExpMixture& f, std::span<const double> x, const SolverConfig& cfg);

// Largest gain from adding a concave kink at an observation, divided by the
// data range so the tolerance is scale free.
double log_concave_gap(const PiecewiseLogLinear& f, std::span<const double> x);

}  // namespace shapetest::detail

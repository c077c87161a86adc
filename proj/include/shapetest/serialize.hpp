#pragma once

#include <string>

#include <json.hpp>

#include "shapetest/density.hpp"
#include "shapetest/npmle.hpp"
#include "shapetest/nplrt.hpp"

namespace shapetest {

using Json = nlohmann::json;

// {"type": "step", "breakpoints": [...], "heights": [...]}, and likewise
// beta_kernel_mixture (k, support_points, weights), exp_mixture (rates,
// weights), piecewise_log_linear (knots, phi), reference (spec).
Json density_to_json(const Density& d);
Density density_from_json(const Json& j);

Json report_to_json(const FitReport& r);
FitReport report_from_json(const Json& j);

// Density fields plus "class" and "report".
Json fit_to_json(const FittedDensity& fit, const HypothesisClass& cls);

// Alpha levels print as at least two decimals: "0.05", "0.10", "0.001".
std::string alpha_key(double alpha);

Json test_result_to_json(const TestResult& r);

}  // namespace shapetest

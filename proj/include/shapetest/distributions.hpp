#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shapetest/rng.hpp"

namespace shapetest {

enum class DistName {
    Exp,
    Beta,
    Unif,
    Gamma,
    Laplace,
    Normal,
    Lognormal,
    Pareto,
    T,
    MixExp,
    HalfNormal,
    Halft,
    MixNormal,
};

std::string_view to_string(DistName name);

// A validated simulation distribution. Parameterizations:
//   Exp(rate)  Beta(a,b)  Unif(a,b)  Gamma(shape,rate)  Laplace(scale)
//   Normal(mu,sigma)  Lognormal(mu,sigma)  Pareto(alpha) on (1,inf)  t(nu)
//   MixExp(p=[...],lambda=[...])  HalfNormal(sigma)  Halft(nu)
//   MixNormal(mu) = 0.5 N(0,1) + 0.5 N(mu,1), or
//   MixNormal(p=[...],mu=[...],sigma=[...])
struct DistSpec {
    DistName name = DistName::Exp;
    std::vector<double> params;   // positional parameters
    std::vector<double> weights;  // mixtures only
    std::vector<double> rates;    // MixExp
    std::vector<double> means;    // MixNormal
    std::vector<double> sds;      // MixNormal
    std::optional<double> tau_hint;

    // Canonical text form; parse_spec(to_string()) reproduces the spec.
    std::string to_string() const;
};

DistSpec parse_spec(std::string_view text);

// Exact pdf/cdf/quantile of a DistSpec plus a sampler. Immutable.
class ReferenceDistribution {
public:
    explicit ReferenceDistribution(DistSpec spec);

    const DistSpec& spec() const noexcept { return spec_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double sample(RngStream& rng) const;
    std::pair<double, double> support() const;

private:
    DistSpec spec_;
};

ReferenceDistribution realize(const DistSpec& spec);

}  // namespace shapetest

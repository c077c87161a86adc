#include "shapetest/serialize.hpp"

#include <charconv>

#include "shapetest/error.hpp"
#include "shapetest/format.hpp"

namespace shapetest {

namespace {

template <class T>
T field(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

Json density_to_json(const Density& d)
{
    Json j;
    j["type"] = type_name(d);
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, StepDensity>) {
                j["breakpoints"] = f.breakpoints();
                j["heights"] = f.heights();
            } else if constexpr (std::is_same_v<T, BetaKernelMixture>) {
                j["k"] = f.k();
                j["support_points"] = f.support_points();
                j["weights"] = f.weights();
            } else if constexpr (std::is_same_v<T, ExpMixture>) {
                j["rates"] = f.rates();
                j["weights"] = f.weights();
            } else if constexpr (std::is_same_v<T, PiecewiseLogLinear>) {
                j["knots"] = f.knots();
                j["phi"] = f.phi();
            } else {
                j["spec"] = f.spec().to_string();
            }
        },
        d);
    return j;
}

Density density_from_json(const Json& j)
{
    const auto type = field<std::string>(j, "type");
    using V = std::vector<double>;
    if (type == "step") {
        return StepDensity(field<V>(j, "breakpoints"), field<V>(j, "heights"));
    }
    if (type == "beta_kernel_mixture") {
        return BetaKernelMixture(field<int>(j, "k"), field<V>(j, "support_points"), field<V>(j, "weights"));
    }
    if (type == "exp_mixture") {
        return ExpMixture(field<V>(j, "rates"), field<V>(j, "weights"));
    }
    if (type == "piecewise_log_linear") {
        return PiecewiseLogLinear(field<V>(j, "knots"), field<V>(j, "phi"));
    }
    if (type == "reference") {
        return realize(parse_spec(field<std::string>(j, "spec")));
    }
    throw Error(ErrorCode::ParseError, "unknown density type '" + type + "'");
}

Json report_to_json(const FitReport& r)
{
    return Json{{"loglik", r.loglik},
                {"iterations", r.iterations},
                {"optimality_gap", r.optimality_gap},
                {"converged", r.converged},
                {"support_size", r.support_size}};
}

FitReport report_from_json(const Json& j)
{
    FitReport r;
    r.loglik = field<double>(j, "loglik");
    r.iterations = field<int>(j, "iterations");
    r.optimality_gap = field<double>(j, "optimality_gap");
    r.converged = field<bool>(j, "converged");
    r.support_size = field<std::size_t>(j, "support_size");
    return r;
}

Json fit_to_json(const FittedDensity& fit, const HypothesisClass& cls)
{
    Json j = density_to_json(fit.density);
    j["class"] = cls.to_string();
    j["report"] = report_to_json(fit.report);
    return j;
}

std::string alpha_key(double alpha)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, alpha, std::chars_format::fixed, 2);
    double back = 0.0;
    std::from_chars(buf, res.ptr, back);
    if (back == alpha) {
        return std::string(buf, res.ptr);
    }
    return format_double(alpha);
}

Json test_result_to_json(const TestResult& r)
{
    Json decisions = Json::object();
    for (const auto& [a, rej] : r.reject_at) {
        decisions[alpha_key(a)] = rej;
    }
    Json boot = nullptr;
    if (r.bootstrap) {
        Json crit = Json::object();
        for (const auto& [a, v] : r.bootstrap->critical_values) {
            crit[alpha_key(a)] = v;
        }
        boot = Json{{"B", r.bootstrap->B},
                    {"failures", r.bootstrap->failures},
                    {"critical_values", crit},
                    {"p_value", r.bootstrap->p_value},
                    {"base_seed", r.bootstrap->base_seed}};
    }
    return Json{{"class", r.cls.to_string()},
                {"method", to_string(r.method)},
                {"n", r.statistic.n},
                {"lambda", r.statistic.lambda},
                {"variant", to_string(r.statistic.variant)},
                {"z", r.statistic.z},
                {"p_value", r.statistic.p_value},
                {"alpha_decisions", decisions},
                {"fit", fit_to_json(r.fit, r.cls)},
                {"bootstrap", boot},
                {"seed", r.seed}};
}

}  // namespace shapetest

#include "shapetest/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "numeric.hpp"
#include "shapetest/error.hpp"
#include "shapetest/format.hpp"

namespace shapetest {

namespace bm = boost::math;

namespace {

using Policy = bm::policies::policy<bm::policies::domain_error<bm::policies::errno_on_error>,
                                    bm::policies::overflow_error<bm::policies::errno_on_error>,
                                    bm::policies::evaluation_error<bm::policies::errno_on_error>,
                                    bm::policies::promote_double<false>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NameEntry {
    std::string_view text;
    DistName name;
};

constexpr NameEntry kNames[] = {
    {"Exp", DistName::Exp},         {"Beta", DistName::Beta},
    {"Unif", DistName::Unif},       {"Gamma", DistName::Gamma},
    {"Laplace", DistName::Laplace}, {"Normal", DistName::Normal},
    {"Lognormal", DistName::Lognormal}, {"Pareto", DistName::Pareto},
    {"t", DistName::T},             {"MixExp", DistName::MixExp},
    {"HalfNormal", DistName::HalfNormal}, {"Halft", DistName::Halft},
    {"MixNormal", DistName::MixNormal},
};

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::string_view trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view tok)
{
    std::string_view t = trim(tok);
    if (!t.empty() && t.front() == '+') {
        t.remove_prefix(1);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::BadParameter, "not a finite number: '" + std::string(tok) + "'");
    }
    return v;
}

// Split on commas that are not inside [...].
std::vector<std::string_view> split_top(std::string_view s)
{
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '[') {
            ++depth;
        } else if (s[i] == ']') {
            --depth;
        } else if (s[i] == ',' && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    if (depth != 0) {
        throw Error(ErrorCode::BadParameter, "unbalanced brackets in '" + std::string(s) + "'");
    }
    auto last = trim(s.substr(start));
    if (!last.empty() || !out.empty()) {
        out.push_back(last);
    }
    return out;
}

std::vector<double> parse_list(std::string_view tok)
{
    std::string_view t = trim(tok);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
        throw Error(ErrorCode::BadParameter, "expected a bracketed list: '" + std::string(tok) + "'");
    }
    std::vector<double> out;
    for (auto item : split_top(t.substr(1, t.size() - 2))) {
        out.push_back(parse_number(item));
    }
    return out;
}

std::string format_list(const std::vector<double>& xs)
{
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += format_double(xs[i]);
    }
    return s + "]";
}

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw Error(ErrorCode::BadParameter, what);
    }
}

void require_positive(double v, std::string_view what)
{
    require(v > 0.0, std::string(what) + " must be positive, got " + format_double(v));
}

void validate_weights(const std::vector<double>& w)
{
    require(!w.empty(), "mixture weights are empty");
    double sum = 0.0;
    for (double x : w) {
        require_positive(x, "mixture weight");
        sum += x;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "mixture weights must sum to 1, got " + format_double(sum));
}

void validate(DistSpec& d)
{
    const auto np = d.params.size();
    auto arity = [&](std::size_t k) {
        require(np == k, std::string(to_string(d.name)) + " takes " + std::to_string(k) + " parameter(s), got " +
                             std::to_string(np));
    };
    switch (d.name) {
    case DistName::Exp:
        arity(1);
        require_positive(d.params[0], "Exp rate");
        d.tau_hint = 0.0;
        break;
    case DistName::Beta:
        arity(2);
        require_positive(d.params[0], "Beta alpha");
        require_positive(d.params[1], "Beta beta");
        d.tau_hint = 0.0;
        break;
    case DistName::Unif:
        arity(2);
        require(d.params[0] < d.params[1], "Unif requires a < b");
        d.tau_hint = d.params[0];
        break;
    case DistName::Gamma:
        arity(2);
        require_positive(d.params[0], "Gamma shape");
        require_positive(d.params[1], "Gamma rate");
        d.tau_hint = 0.0;
        break;
    case DistName::Laplace:
        arity(1);
        require_positive(d.params[0], "Laplace scale");
        d.tau_hint.reset();
        break;
    case DistName::Normal:
    case DistName::Lognormal:
        arity(2);
        require_positive(d.params[1], "sigma");
        d.tau_hint = d.name == DistName::Lognormal ? std::optional<double>(0.0) : std::nullopt;
        break;
    case DistName::Pareto:
        arity(1);
        require_positive(d.params[0], "Pareto alpha");
        d.tau_hint = 1.0;
        break;
    case DistName::T:
        arity(1);
        require_positive(d.params[0], "t degrees of freedom");
        d.tau_hint.reset();
        break;
    case DistName::HalfNormal:
        arity(1);
        require_positive(d.params[0], "HalfNormal sigma");
        d.tau_hint = 0.0;
        break;
    case DistName::Halft:
        arity(1);
        require_positive(d.params[0], "Halft degrees of freedom");
        d.tau_hint = 0.0;
        break;
    case DistName::MixExp:
        require(np == 0, "MixExp takes keyword arguments p=[...], lambda=[...]");
        validate_weights(d.weights);
        require(d.rates.size() == d.weights.size(), "MixExp p and lambda lengths differ");
        for (double r : d.rates) {
            require_positive(r, "MixExp rate");
        }
        d.tau_hint = 0.0;
        break;
    case DistName::MixNormal:
        if (np == 1) {
            d.weights = {0.5, 0.5};
            d.means = {0.0, d.params[0]};
            d.sds = {1.0, 1.0};
        } else {
            require(np == 0, "MixNormal takes one location or keyword arguments p, mu, sigma");
        }
        validate_weights(d.weights);
        require(d.means.size() == d.weights.size(), "MixNormal p and mu lengths differ");
        if (d.sds.empty()) {
            d.sds.assign(d.weights.size(), 1.0);
        }
        require(d.sds.size() == d.weights.size(), "MixNormal p and sigma lengths differ");
        for (double s : d.sds) {
            require_positive(s, "MixNormal sigma");
        }
        d.tau_hint.reset();
        break;
    }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

std::string_view to_string(DistName name)
{
    for (const auto& e : kNames) {
        if (e.name == name) {
            return e.text;
        }
    }
    return "?";
}

std::string DistSpec::to_string() const
{
    std::string s(shapetest::to_string(name));
    s += "(";
    if (name == DistName::MixExp) {
        s += "p=" + format_list(weights) + ",lambda=" + format_list(rates);
    } else if (name == DistName::MixNormal && params.empty()) {
        s += "p=" + format_list(weights) + ",mu=" + format_list(means) + ",sigma=" + format_list(sds);
    } else {
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (i) {
                s += ",";
            }
            s += format_double(params[i]);
        }
    }
    return s + ")";
}

DistSpec parse_spec(std::string_view text)
{
    std::string_view t = trim(text);
    auto open = t.find('(');
    if (open == std::string_view::npos || t.back() != ')') {
        throw Error(ErrorCode::BadParameter, "expected Name(p1,...,pk), got '" + std::string(text) + "'");
    }
    std::string_view name_tok = trim(t.substr(0, open));
    DistSpec d;
    bool found = false;
    for (const auto& e : kNames) {
        if (iequals(e.text, name_tok)) {
            d.name = e.name;
            found = true;
            break;
        }
    }
    if (!found) {
        throw Error(ErrorCode::UnknownDistribution, "unknown distribution '" + std::string(name_tok) + "'");
    }

    for (auto arg : split_top(t.substr(open + 1, t.size() - open - 2))) {
        if (arg.empty()) {
            throw Error(ErrorCode::BadParameter, "empty argument in '" + std::string(text) + "'");
        }
        auto eq = arg.find('=');
        if (eq == std::string_view::npos) {
            d.params.push_back(parse_number(arg));
            continue;
        }
        std::string_view key = trim(arg.substr(0, eq));
        std::string_view value = trim(arg.substr(eq + 1));
        if (iequals(key, "p") || iequals(key, "w")) {
            d.weights = parse_list(value);
        } else if (iequals(key, "lambda") && d.name == DistName::MixExp) {
            d.rates = parse_list(value);
        } else if (iequals(key, "mu") && d.name == DistName::MixNormal) {
            d.means = parse_list(value);
        } else if (iequals(key, "sigma") && d.name == DistName::MixNormal) {
            d.sds = parse_list(value);
        } else {
            throw Error(ErrorCode::BadParameter, "unexpected keyword '" + std::string(key) + "'");
        }
    }
    validate(d);
    return d;
}

ReferenceDistribution::ReferenceDistribution(DistSpec spec) : spec_(std::move(spec))
{
    validate(spec_);
}

ReferenceDistribution realize(const DistSpec& spec) { return ReferenceDistribution(spec); }

std::pair<double, double> ReferenceDistribution::support() const
{
    const auto& p = spec_.params;
    switch (spec_.name) {
    case DistName::Beta: return {0.0, 1.0};
    case DistName::Unif: return {p[0], p[1]};
    case DistName::Pareto: return {1.0, kInf};
    case DistName::Laplace:
    case DistName::Normal:
    case DistName::T:
    case DistName::MixNormal: return {-kInf, kInf};
    default: return {0.0, kInf};
    }
}

double ReferenceDistribution::pdf(double x) const
{
    const auto& p = spec_.params;
    switch (spec_.name) {
    case DistName::Exp:
        return x >= 0.0 ? p[0] * std::exp(-p[0] * x) : 0.0;
    case DistName::Beta:
        return (x > 0.0 && x < 1.0) ? bm::pdf(bm::beta_distribution<double, Policy>(p[0], p[1]), x) : 0.0;
    case DistName::Unif:
        return (x > p[0] && x < p[1]) ? 1.0 / (p[1] - p[0]) : 0.0;
    case DistName::Gamma:
        return x > 0.0 ? bm::pdf(bm::gamma_distribution<double, Policy>(p[0], 1.0 / p[1]), x) : 0.0;
    case DistName::Laplace:
        return std::exp(-std::abs(x) / p[0]) / (2.0 * p[0]);
    case DistName::Normal:
        return bm::pdf(bm::normal_distribution<double, Policy>(p[0], p[1]), x);
    case DistName::Lognormal:
        return x > 0.0 ? bm::pdf(bm::lognormal_distribution<double, Policy>(p[0], p[1]), x) : 0.0;
    case DistName::Pareto:
        return x >= 1.0 ? p[0] * std::pow(x, -p[0] - 1.0) : 0.0;
    case DistName::T:
        return bm::pdf(bm::students_t_distribution<double, Policy>(p[0]), x);
    case DistName::HalfNormal:
        return x >= 0.0 ? 2.0 * bm::pdf(bm::normal_distribution<double, Policy>(0.0, p[0]), x) : 0.0;
    case DistName::Halft:
        return x >= 0.0 ? 2.0 * bm::pdf(bm::students_t_distribution<double, Policy>(p[0]), x) : 0.0;
    case DistName::MixExp: {
        if (x < 0.0) {
            return 0.0;
        }
        double f = 0.0;
        for (std::size_t k = 0; k < spec_.weights.size(); ++k) {
            f += spec_.weights[k] * spec_.rates[k] * std::exp(-spec_.rates[k] * x);
        }
        return f;
    }
    case DistName::MixNormal: {
        double f = 0.0;
        for (std::size_t k = 0; k < spec_.weights.size(); ++k) {
            double z = (x - spec_.means[k]) / spec_.sds[k];
            f += spec_.weights[k] * std::exp(-0.5 * z * z) / (spec_.sds[k] * std::sqrt(2.0 * std::numbers::pi));
        }
        return f;
    }
    }
    return 0.0;
}

double ReferenceDistribution::cdf(double x) const
{
    const auto& p = spec_.params;
    switch (spec_.name) {
    case DistName::Exp:
        return x > 0.0 ? -std::expm1(-p[0] * x) : 0.0;
    case DistName::Beta:
        if (x <= 0.0) {
            return 0.0;
        }
        return x >= 1.0 ? 1.0 : bm::cdf(bm::beta_distribution<double, Policy>(p[0], p[1]), x);
    case DistName::Unif:
        return std::clamp((x - p[0]) / (p[1] - p[0]), 0.0, 1.0);
    case DistName::Gamma:
        return x > 0.0 ? bm::cdf(bm::gamma_distribution<double, Policy>(p[0], 1.0 / p[1]), x) : 0.0;
    case DistName::Laplace:
        return x < 0.0 ? 0.5 * std::exp(x / p[0]) : 1.0 - 0.5 * std::exp(-x / p[0]);
    case DistName::Normal:
        return normal_cdf((x - p[0]) / p[1]);
    case DistName::Lognormal:
        return x > 0.0 ? normal_cdf((std::log(x) - p[0]) / p[1]) : 0.0;
    case DistName::Pareto:
        return x > 1.0 ? -std::expm1(-p[0] * std::log(x)) : 0.0;
    case DistName::T:
        return bm::cdf(bm::students_t_distribution<double, Policy>(p[0]), x);
    case DistName::HalfNormal:
        return x > 0.0 ? std::erf(x / (p[0] * std::numbers::sqrt2)) : 0.0;
    case DistName::Halft:
        return x > 0.0 ? 2.0 * bm::cdf(bm::students_t_distribution<double, Policy>(p[0]), x) - 1.0 : 0.0;
    case DistName::MixExp: {
        if (x <= 0.0) {
            return 0.0;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < spec_.weights.size(); ++k) {
            s += spec_.weights[k] * std::exp(-spec_.rates[k] * x);
        }
        return 1.0 - s;
    }
    case DistName::MixNormal: {
        double c = 0.0;
        for (std::size_t k = 0; k < spec_.weights.size(); ++k) {
            c += spec_.weights[k] * normal_cdf((x - spec_.means[k]) / spec_.sds[k]);
        }
        return c;
    }
    }
    return 0.0;
}

double ReferenceDistribution::quantile(double u) const
{
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorCode::UOutOfRange, "quantile level must lie in (0,1)");
    }
    const auto& p = spec_.params;
    switch (spec_.name) {
    case DistName::Exp: return -std::log1p(-u) / p[0];
    case DistName::Beta: return bm::quantile(bm::beta_distribution<double, Policy>(p[0], p[1]), u);
    case DistName::Unif: return p[0] + u * (p[1] - p[0]);
    case DistName::Gamma: return bm::quantile(bm::gamma_distribution<double, Policy>(p[0], 1.0 / p[1]), u);
    case DistName::Laplace: return u < 0.5 ? p[0] * std::log(2.0 * u) : -p[0] * std::log(2.0 * (1.0 - u));
    case DistName::Normal: return bm::quantile(bm::normal_distribution<double, Policy>(p[0], p[1]), u);
    case DistName::Lognormal: return bm::quantile(bm::lognormal_distribution<double, Policy>(p[0], p[1]), u);
    case DistName::Pareto: return std::pow(1.0 - u, -1.0 / p[0]);
    case DistName::T: return bm::quantile(bm::students_t_distribution<double, Policy>(p[0]), u);
    case DistName::HalfNormal: return p[0] * std::numbers::sqrt2 * bm::erf_inv(u, Policy());
    case DistName::Halft:
        return bm::quantile(bm::students_t_distribution<double, Policy>(p[0]), 0.5 * (1.0 + u));
    case DistName::MixExp:
    case DistName::MixNormal: {
        auto [lo, hi] = support();
        return detail::bisect_quantile([this](double x) { return cdf(x); }, u, lo, hi);
    }
    }
    return 0.0;
}

double ReferenceDistribution::sample(RngStream& rng) const
{
    const auto& p = spec_.params;
    auto pick = [&](const std::vector<double>& w) {
        double u = rng.uniform01();
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < w.size(); ++k) {
            acc += w[k];
            if (u < acc) {
                return k;
            }
        }
        return w.size() - 1;
    };
    switch (spec_.name) {
    case DistName::Exp: return -std::log(rng.uniform01()) / p[0];
    case DistName::Beta: {
        double x = std::gamma_distribution<double>(p[0], 1.0)(rng);
        double y = std::gamma_distribution<double>(p[1], 1.0)(rng);
        return x / (x + y);
    }
    case DistName::Unif: return p[0] + (p[1] - p[0]) * rng.uniform01();
    case DistName::Gamma: return std::gamma_distribution<double>(p[0], 1.0 / p[1])(rng);
    case DistName::Laplace: {
        double u = rng.uniform01();
        return u < 0.5 ? p[0] * std::log(2.0 * u) : -p[0] * std::log(2.0 * (1.0 - u));
    }
    case DistName::Normal: return std::normal_distribution<double>(p[0], p[1])(rng);
    case DistName::Lognormal: return std::exp(std::normal_distribution<double>(p[0], p[1])(rng));
    case DistName::Pareto: return std::pow(rng.uniform01(), -1.0 / p[0]);
    case DistName::T: return std::student_t_distribution<double>(p[0])(rng);
    case DistName::HalfNormal: return std::abs(std::normal_distribution<double>(0.0, p[0])(rng));
    case DistName::Halft: return std::abs(std::student_t_distribution<double>(p[0])(rng));
    case DistName::MixExp: {
        auto k = pick(spec_.weights);
        return -std::log(rng.uniform01()) / spec_.rates[k];
    }
    case DistName::MixNormal: {
        auto k = pick(spec_.weights);
        return std::normal_distribution<double>(spec_.means[k], spec_.sds[k])(rng);
    }
    }
    return 0.0;
}

}  // namespace shapetest

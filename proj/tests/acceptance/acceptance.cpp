// Runs each acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: acceptance [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "shapetest/bootstrap.hpp"
#include "shapetest/distributions.hpp"
#include "shapetest/error.hpp"
#include "shapetest/npmle.hpp"
#include "shapetest/nplrt.hpp"
#include "shapetest/samples.hpp"
#include "shapetest/simharness.hpp"

using namespace shapetest;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        if (detail.tellp() > 0) {
            detail << "; ";
        }
        detail << what << (ok ? "" : " [FAIL]");
    }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Cell {
    const char* dist;
    std::size_t n;
    double target;
    double tol;
};

// Runs one rejection-rate scenario and checks it against target +- tol.
double check_cell(Outcome& o, const Cell& cell, const HypothesisClass& cls, Method method, std::size_t reps,
                  std::size_t B, std::uint64_t seed, unsigned workers = 0)
{
    ScenarioConfig c;
    c.dist = parse_spec(cell.dist);
    c.n = cell.n;
    c.cls = cls;
    c.method = method;
    c.reps = reps;
    c.B = B;
    c.seed = seed;
    c.workers = workers;
    const ScenarioResult r = run_scenario(c);
    o.check(std::abs(r.reject_proportion - cell.target) <= cell.tol,
            std::string(cell.dist) + " n=" + std::to_string(cell.n) +
                fmt(" reject=%.4f (target %.4f +- %.3f)", r.reject_proportion, cell.target, cell.tol));
    return r.reject_proportion;
}

double loglik(const Density& d, std::span<const double> z)
{
    double s = 0.0;
    for (double x : z) {
        s += std::log(pdf_at(d, x));
    }
    return s;
}

SortedSample draw_sorted(const std::string& spec, std::size_t n, RngStream& rng, std::optional<double> tau)
{
    const auto d = realize(parse_spec(spec));
    std::vector<double> v(n);
    for (double& x : v) {
        x = d.sample(rng);
    }
    std::sort(v.begin(), v.end());
    return SortedSample(std::move(v), tau);
}

std::vector<double> normalized(std::vector<double> w)
{
    double t = 0.0;
    for (double x : w) {
        t += x;
    }
    for (double& x : w) {
        x /= t;
    }
    return w;
}

// ------------------------------------------------------------------ criteria

void criterion_1(Outcome& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = 10000, samples = 2000;
    std::vector<double> stat(samples);
    std::vector<double> u(n);
    for (std::size_t s = 0; s < samples; ++s) {
        RngStream rng = RngStream::derive(101, {s});
        for (double& x : u) {
            x = rng.uniform01();
        }
        std::sort(u.begin(), u.end());
        double acc = 0.0, prev = 0.0;
        for (double x : u) {
            acc += std::log(static_cast<double>(n) * (x - prev));
            prev = x;
        }
        const double jn = -acc / static_cast<double>(n);
        stat[s] = std::sqrt(static_cast<double>(n)) * (jn - kEulerGamma);
    }
    double mean = 0.0;
    for (double x : stat) {
        mean += x / samples;
    }
    double var = 0.0;
    for (double x : stat) {
        var += (x - mean) * (x - mean) / (samples - 1);
    }
    const double target_var = std::numbers::pi * std::numbers::pi / 6 - 1;
    o.check(std::abs(mean) <= 0.06, fmt("mean %.4f (target 0 +- 0.06)", mean));
    o.check(std::abs(var - target_var) <= 0.05, fmt("variance %.4f (target %.5f +- 0.05)", var, target_var));
    const double secs = seconds_since(t0);
    o.check(secs < 60.0, fmt("runtime %.1fs (< 60s)", secs));
}

void criterion_2(Outcome& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto cls = HypothesisClass::monotone();
    check_cell(o, {"Exp(1)", 100, 0.0035, 0.01}, cls, Method::Asymptotic, 2000, 0, 201);
    check_cell(o, {"Unif(0,1)", 2000, 0.0396, 0.015}, cls, Method::Asymptotic, 2000, 0, 202);
    check_cell(o, {"Beta(2,1)", 500, 0.9995, 0.01}, cls, Method::Asymptotic, 2000, 0, 203);
    const double secs = seconds_since(t0);
    o.check(secs < 600.0, fmt("runtime %.1fs (< 600s)", secs));
}

void criterion_3(Outcome& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto cls = HypothesisClass::monotone();
    check_cell(o, {"Exp(1)", 100, 0.0378, 0.03}, cls, Method::Bootstrap, 300, 200, 301, 4);
    check_cell(o, {"Beta(2,1)", 100, 0.7590, 0.06}, cls, Method::Bootstrap, 300, 200, 302, 4);
    const double secs = seconds_since(t0);
    o.check(secs < 1800.0, fmt("runtime %.1fs (< 1800s)", secs));
}

void criterion_4(Outcome& o)
{
    const auto cls = HypothesisClass::k_monotone(2);
    check_cell(o, {"Exp(1)", 100, 0.0477, 0.02}, cls, Method::Asymptotic, 1000, 0, 401);
    check_cell(o, {"Unif(0,1)", 1000, 0.9989, 0.01}, cls, Method::Asymptotic, 1000, 0, 402);
}

void criterion_5(Outcome& o)
{
    const auto cls = HypothesisClass::log_concave();
    check_cell(o, {"Normal(0,1)", 100, 0.0311, 0.02}, cls, Method::Asymptotic, 1000, 0, 501);
    check_cell(o, {"t(2)", 500, 0.6049, 0.05}, cls, Method::Asymptotic, 1000, 0, 502);
    check_cell(o, {"Pareto(1)", 100, 0.9865, 0.02}, cls, Method::Asymptotic, 1000, 0, 503);
}

void criterion_6(Outcome& o)
{
    const auto cls = HypothesisClass::completely_monotone();
    check_cell(o, {"Exp(1)", 500, 0.069, 0.03}, cls, Method::Asymptotic, 1000, 0, 601);
    check_cell(o, {"Unif(0,1)", 250, 1.000, 0.02}, cls, Method::Asymptotic, 1000, 0, 602);
}

// (a) Grenander versus brute-force least concave majorant, exact.
bool property_lcm()
{
    RngStream rng(701);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 12);
        const double tau = rng.uniform01() < 0.5 ? 0.0 : -rng.uniform01();
        std::vector<double> z = oracle::uniform_draws(n, rng(), 0.0, 3.0);
        std::sort(z.begin(), z.end());
        if (std::adjacent_find(z.begin(), z.end()) != z.end()) {
            continue;
        }
        if (fit_grenander(SortedSample(z, tau)).density.heights() != oracle::lcm_slopes(z, tau)) {
            return false;
        }
    }
    return true;
}

// (b) f(0+) <= k / Z_1 and every atom in (Z_1, k Z_n] on 200 k-monotone fits.
bool property_lemma_bounds()
{
    RngStream rng(702);
    const char* dists[] = {"Exp(1)", "Beta(1,2)", "HalfNormal(1)", "Halft(3)", "Gamma(1,2)"};
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + trial % 2;
        const std::size_t n = 20 + static_cast<std::size_t>(rng() % 181);
        const auto s = draw_sorted(dists[trial % 5], n, rng, 0.0);
        const auto fit = fit_k_monotone(s, k);
        const auto& a = fit.density.support_points();
        const bool ok = fit.report.converged && fit.density.pdf(0.0) <= k / s.front() * (1 + 1e-12) &&
                        a.front() > s.front() && a.back() <= k * s.back() * (1 + 1e-12);
        if (!ok) {
            return false;
        }
    }
    return true;
}

// (c) Each class fit beats 100 random members of its class on the same sample.
bool property_dominance()
{
    RngStream rng(703);
    for (int fit_id = 0; fit_id < 5; ++fit_id) {
        const auto s = draw_sorted(fit_id % 2 ? "Exp(1)" : "HalfNormal(1)", 50 + 30 * fit_id, rng, 0.0);
        const auto z = s.z();
        const double zn = s.back();
        const double gren = fit_grenander(s).report.loglik;
        const int k = 2 + fit_id % 2;
        const double km = fit_k_monotone(s, k).report.loglik;
        const double cm = fit_completely_monotone(s).report.loglik;
        const double lc = fit_log_concave(s.with_tau(std::nullopt)).report.loglik;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t m = 1 + rng() % 5;
            // Nonincreasing step density with its last breakpoint at or beyond Z_n.
            std::vector<double> cuts = oracle::uniform_draws(m, rng(), 0.0, 2.0 * zn);
            std::sort(cuts.begin(), cuts.end());
            cuts.back() = std::max(cuts.back(), zn);
            std::vector<double> bp{0.0};
            bp.insert(bp.end(), cuts.begin(), cuts.end());
            if (std::adjacent_find(bp.begin(), bp.end()) != bp.end()) {
                continue;
            }
            std::vector<double> h = oracle::uniform_draws(m, rng(), 0.05, 1.0);
            std::sort(h.rbegin(), h.rend());
            double mass = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                mass += h[j] * (bp[j + 1] - bp[j]);
            }
            for (double& x : h) {
                x /= mass;
            }
            if (loglik(StepDensity(bp, h), z) > gren) {
                return false;
            }

            std::vector<double> atoms = oracle::uniform_draws(m, rng(), zn, 3.0 * zn);
            std::sort(atoms.begin(), atoms.end());
            if (loglik(BetaKernelMixture(k, atoms, normalized(oracle::uniform_draws(m, rng(), 0.05, 1.0))), z) >
                km) {
                return false;
            }

            std::vector<double> rates = oracle::uniform_draws(m, rng(), 0.02, 30.0);
            std::sort(rates.begin(), rates.end());
            if (loglik(ExpMixture(rates, normalized(oracle::uniform_draws(m, rng(), 0.05, 1.0))), z) > cm) {
                return false;
            }

            const double mu = 2.0 * rng.uniform01() - 0.5;
            const double sd = 0.1 + 2.0 * rng.uniform01();
            if (loglik(realize(parse_spec("Normal(" + std::to_string(mu) + "," + std::to_string(sd) + ")")), z) >
                lc) {
                return false;
            }
        }
    }
    return true;
}

// (d) s1 + s2 + s3 = sqrt(n) (Lambda_n - gamma) within 1e-8.
bool property_decomposition()
{
    RngStream rng(704);
    const char* dists[] = {"Exp(1)", "Beta(1,2)", "HalfNormal(2)", "Unif(0,1)"};
    const char* nulls[] = {"Exp(1)", "Exp(0.5)", "HalfNormal(1)", "Unif(0,1.5)"};
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = draw_sorted(dists[trial % 4], 20 + trial, rng, 0.0);
        const auto fit = fit_grenander(s);
        const auto d = decompose(s, fit.density, realize(parse_spec(nulls[trial % 4])));
        const double target = std::sqrt(static_cast<double>(s.n())) * (lambda_n(s, fit.density) - kEulerGamma);
        if (!(std::abs(d.s1 + d.s2 + d.s3 - target) <= 1e-8)) {
            return false;
        }
    }
    return true;
}

// (e) Lambda_n for the monotone class is unchanged when the data are rescaled.
bool property_scale_invariance()
{
    RngStream rng(705);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = draw_sorted("Exp(1)", 100, rng, 0.0);
        const double base = lambda_n(s, fit_grenander(s).density);
        const double c = std::exp(8.0 * rng.uniform01() - 4.0);
        std::vector<double> scaled(s.z().begin(), s.z().end());
        for (double& x : scaled) {
            x *= c;
        }
        const SortedSample t(scaled, 0.0);
        if (!(std::abs(lambda_n(t, fit_grenander(t).density) - base) <= 1e-10)) {
            return false;
        }
    }
    return true;
}

// (f) Bootstrap replicates are identical with 1 and 4 workers.
bool property_bootstrap_workers()
{
    RngStream rng(706);
    for (const auto& cls : {HypothesisClass::monotone(), HypothesisClass::k_monotone(2),
                            HypothesisClass::completely_monotone(), HypothesisClass::log_concave()}) {
        const auto s = draw_sorted("Exp(1)", 80, rng, 0.0);
        const auto fit = fit_class(cls.monotone_family() ? s : s.with_tau(std::nullopt), cls);
        const auto a = bootstrap_lambdas(fit.density, 80, cls, 50, 707, {}, 1);
        const auto b = bootstrap_lambdas(fit.density, 80, cls, 50, 707, {}, 4);
        if (a.lambdas != b.lambdas || a.failures != b.failures) {
            return false;
        }
    }
    return true;
}

void criterion_7(Outcome& o)
{
    o.check(property_lcm(), "(a) Grenander == brute-force LCM");
    o.check(property_lemma_bounds(), "(b) k-monotone bounds");
    o.check(property_dominance(), "(c) likelihood dominance");
    o.check(property_decomposition(), "(d) decomposition identity");
    o.check(property_scale_invariance(), "(e) scale invariance");
    o.check(property_bootstrap_workers(), "(f) bootstrap worker invariance");
}

void criterion_8(Outcome& o)
{
    const auto cls = HypothesisClass::monotone();
    std::vector<double> power;
    for (std::size_t n : {100u, 250u, 500u}) {
        ScenarioConfig c;
        c.dist = parse_spec("Beta(2,1)");
        c.n = n;
        c.cls = cls;
        c.reps = 1000;
        c.seed = 800 + n;
        power.push_back(run_scenario(c).reject_proportion);
    }
    o.check(power[0] < power[1] && power[1] < power[2],
            fmt("power %.3f < %.3f < %.3f", power[0], power[1], power[2]));
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv)
{
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "pivotal null spacings", criterion_1},
        {2, "monotone asymptotic rejection rates", criterion_2},
        {3, "monotone bootstrap rejection rates", criterion_3},
        {4, "2-monotone asymptotic rejection rates", criterion_4},
        {5, "log-concave asymptotic rejection rates", criterion_5},
        {6, "completely monotone asymptotic rejection rates", criterion_6},
        {7, "property suites", criterion_7},
        {8, "consistency trend", criterion_8},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) {
            continue;
        }
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}

#include "shapetest/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapetest/error.hpp"
#include "shapetest/format.hpp"
#include "shapetest/nplrt.hpp"
#include "shapetest/parallel.hpp"
#include "shapetest/samples.hpp"
#include "shapetest/serialize.hpp"
#include "shapetest/simharness.hpp"

namespace shapetest {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string input;
    std::string cls_text;
    std::optional<double> tau;
    std::optional<std::uint64_t> seed;
    std::optional<double> jitter;
    std::string out_path;
    SolverConfig solver;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--input", o.input, "Observations, one per line (first field)")->required();
    cmd->add_option("--class", o.cls_text, "monotone | kmono:K | cm | logconcave")->required();
    cmd->add_option("--tau", o.tau, "Known left endpoint (required for monotone, kmono, cm; must be 0 for kmono, cm)");
    cmd->add_option("--seed", o.seed, "Base seed (random if omitted)");
    cmd->add_option("--jitter", o.jitter, "Break ties by adding Uniform(0, SCALE) noise instead of failing")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out_path, "Write JSON here instead of stdout");
    cmd->add_option("--tol", o.solver.tol_gap, "Optimality-gap tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", o.solver.max_iter, "Solver iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--grid-size", o.solver.grid_size, "Candidate grid size for mixture classes")
        ->check(CLI::PositiveNumber);
}

HypothesisClass resolve_class(const CommonOptions& o)
{
    HypothesisClass cls;
    try {
        cls = HypothesisClass::parse(o.cls_text);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (cls.monotone_family() && !o.tau) {
        throw UsageError("--class " + cls.to_string() + " requires --tau (use --tau 0 for data on (0, inf))");
    }
    if ((cls.kind == HypothesisClass::Kind::KMonotone || cls.kind == HypothesisClass::Kind::CompletelyMonotone) &&
        *o.tau != 0.0) {
        throw UsageError("--class " + cls.to_string() + " is defined on (0, inf); --tau must be 0");
    }
    return cls;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed)
{
    if (seed) {
        return *seed;
    }
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

RawSample load_sample(const CommonOptions& o, const HypothesisClass& cls)
{
    RawSample raw = ingest(read_sample_file(o.input));
    if (cls.kind == HypothesisClass::Kind::KMonotone || cls.kind == HypothesisClass::Kind::CompletelyMonotone) {
        for (std::size_t i = 0; i < raw.values.size(); ++i) {
            if (!(raw.values[i] > 0.0)) {
                throw Error(ErrorCode::NonPositiveObservation,
                            "observation " + std::to_string(i + 1) + " (" + format_double(raw.values[i]) +
                                ") is not positive",
                            i);
            }
        }
    }
    return raw;
}

TiePolicy tie_policy(const CommonOptions& o)
{
    return o.jitter ? TiePolicy::jitter(*o.jitter) : TiePolicy::error();
}

void emit(const Json& j, const std::string& path, std::ostream& out)
{
    const std::string text = j.dump() + '\n';
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text)) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
}

int cmd_fit(const CommonOptions& o, std::ostream& out, std::ostream& err)
{
    const HypothesisClass cls = resolve_class(o);
    const std::uint64_t seed = resolve_seed(o.seed);
    err << "seed: " << seed << '\n';
    const RawSample raw = load_sample(o, cls);
    RngStream rng = RngStream::derive(seed, {0});
    const SortedSample s = to_sorted(raw, o.tau, tie_policy(o), &rng);
    const FittedDensity fit = fit_class(s, cls, o.solver);
    emit(fit_to_json(fit, cls), o.out_path, out);
    if (!fit.report.converged) {
        err << "warning: solver did not converge (gap " << format_double(fit.report.optimality_gap) << ")\n";
    }
    return 0;
}

int cmd_test(const CommonOptions& o, const std::string& method, std::size_t B, double alpha, bool tau_free,
             std::optional<unsigned> workers, std::ostream& out, std::ostream& err)
{
    const HypothesisClass cls = resolve_class(o);
    TestOptions opts;
    opts.cls = cls;
    opts.tau = o.tau;
    try {
        opts.method = parse_method(method);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    opts.tau_free = tau_free;
    opts.solver = o.solver;
    opts.B = B;
    if (std::find(opts.alphas.begin(), opts.alphas.end(), alpha) == opts.alphas.end()) {
        opts.alphas.push_back(alpha);
    }
    opts.ties = tie_policy(o);
    opts.seed = resolve_seed(o.seed);
    opts.workers = workers ? *workers : default_workers();
    err << "seed: " << opts.seed << '\n';

    const RawSample raw = load_sample(o, cls);
    const TestResult res = run_test(raw, opts);
    emit(test_result_to_json(res), o.out_path, out);

    const bool reject = res.rejects(alpha);
    err << (reject ? "reject" : "do not reject") << " H0: " << cls.to_string() << " at alpha=" << format_double(alpha)
        << " (" << to_string(res.method) << ", lambda=" << format_double(res.statistic.lambda)
        << ", z=" << format_double(res.statistic.z) << ", p="
        << format_double(res.bootstrap ? res.bootstrap->p_value : res.statistic.p_value) << ")\n";
    return 0;
}

int cmd_simulate(const std::string& config, const std::string& out_path, std::optional<unsigned> workers,
                 bool resume, std::ostream& err)
{
    std::vector<ScenarioConfig> suite = read_suite_file(config);
    std::set<std::uint64_t> seeds;
    for (ScenarioConfig& c : suite) {
        if (workers) {
            c.workers = *workers;
        }
        seeds.insert(c.seed);
    }
    err << "seed:";
    for (std::uint64_t s : seeds) {
        err << ' ' << s;
    }
    err << '\n';
    run_suite(suite, out_path, resume, &err);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Likelihood ratio tests for shape-constrained densities"};
    app.require_subcommand(1);

    CommonOptions fit_opts;
    CLI::App* fit = app.add_subcommand("fit", "Fit the maximum-likelihood density of a shape class");
    add_common(fit, fit_opts);

    CommonOptions test_opts;
    std::string method = "asymptotic";
    std::size_t B = 500;
    double alpha = 0.05;
    bool tau_free = false;
    std::optional<unsigned> test_workers;
    CLI::App* test = app.add_subcommand("test", "Test whether a sample has a density in a shape class");
    add_common(test, test_opts);
    test->add_option("--method", method, "asymptotic | bootstrap")->capture_default_str();
    test->add_option("--B", B, "Bootstrap replicates")->capture_default_str()->check(CLI::PositiveNumber);
    test->add_option("--alpha", alpha, "Level for the verdict line")->capture_default_str()->check(
        CLI::Range(0.0, 1.0));
    test->add_flag("--tau-free", tau_free, "Use the statistic without the first spacing");
    test->add_option("--workers", test_workers, "Bootstrap threads (default: SHAPETEST_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);

    std::string config, sim_out;
    std::optional<unsigned> sim_workers;
    bool resume = false;
    CLI::App* sim = app.add_subcommand("simulate", "Run a Monte-Carlo suite of rejection-rate scenarios");
    sim->add_option("--config", config, "Suite JSON file")->required();
    sim->add_option("--out", sim_out, "Results file (.csv or .json)")->required();
    sim->add_option("--workers", sim_workers, "Threads per scenario (default: SHAPETEST_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    sim->add_flag("--resume", resume, "Keep matching rows of an existing results file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) {
            return cmd_fit(fit_opts, out, err);
        }
        if (test->parsed()) {
            return cmd_test(test_opts, method, B, alpha, tau_free, test_workers, out, err);
        }
        return cmd_simulate(config, sim_out, sim_workers, resume, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace shapetest

#include "shapetest/simharness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shapetest/error.hpp"
#include "shapetest/format.hpp"
#include "shapetest/parallel.hpp"

namespace shapetest {

void ScenarioConfig::validate() const
{
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "scenario needs n >= 1");
    }
    if (reps == 0) {
        throw Error(ErrorCode::InvalidArgument, "scenario needs reps >= 1");
    }
    if (method == Method::Bootstrap && B == 0) {
        throw Error(ErrorCode::InvalidArgument, "bootstrap scenario needs B >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0,1), got " + format_double(alpha));
    }
}

std::optional<double> ScenarioConfig::resolved_tau() const
{
    if (tau) {
        return tau;
    }
    if (cls.monotone_family()) {
        return 0.0;
    }
    return dist.tau_hint;
}

namespace {

struct Outcome {
    bool reject = false;
    bool has_lambda = false;
    double lambda = 0.0;
    bool error = false;
};

Outcome run_replicate(const ScenarioConfig& cfg, const ReferenceDistribution& dist, std::optional<double> tau,
                      std::size_t r)
{
    RngStream rng = RngStream::derive(cfg.seed, {r});
    RawSample raw;
    raw.values.resize(cfg.n);
    for (double& x : raw.values) {
        x = dist.sample(rng);
    }
    TestOptions opts;
    opts.cls = cfg.cls;
    opts.tau = tau;
    opts.method = cfg.method;
    opts.B = cfg.B;
    opts.alphas = {cfg.alpha};
    opts.seed = stream_key(cfg.seed, {r, 1});
    opts.workers = 1;

    Outcome out;
    try {
        const TestResult res = run_test(raw, opts);
        out.reject = res.reject_at.front().second;
        out.has_lambda = true;
        out.lambda = res.statistic.lambda;
    } catch (const Error& e) {
        switch (e.code()) {
        case ErrorCode::TauNotBelowMinimum:
        case ErrorCode::NonPositiveObservation:
            // The sample itself is incompatible with the null class.
            out.reject = true;
            break;
        default: out.error = true;
        }
    }
    return out;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') {
            q += '"';
        }
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_csv(std::string_view line)
{
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    return fields;
}

template <class T>
T parse_number(const std::string& s, const char* what)
{
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, std::string("bad ") + what + " '" + s + "'");
    }
    return value;
}

// The configuration part of a CSV row; identifies a scenario for resuming.
std::string csv_key(const ScenarioConfig& c)
{
    std::string s = csv_field(c.dist.to_string());
    s += ',' + std::to_string(c.n);
    s += ',' + c.cls.to_string();
    s += ',' + std::string(to_string(c.method));
    s += ',' + std::to_string(c.reps);
    s += ',' + std::to_string(c.method == Method::Bootstrap ? c.B : 0);
    s += ',' + format_double(c.alpha);
    s += ',' + std::to_string(c.seed);
    return s;
}

bool same_config(const ScenarioConfig& a, const ScenarioConfig& b) { return csv_key(a) == csv_key(b); }

void write_text(const std::filesystem::path& path, const std::string& text, bool append)
{
    std::ofstream out(path, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << text;
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg)
{
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const ReferenceDistribution dist = realize(cfg.dist);
    const std::optional<double> tau = cfg.resolved_tau();

    std::vector<Outcome> outcomes(cfg.reps);
    parallel_for(cfg.reps, cfg.workers, [&](std::size_t r) { outcomes[r] = run_replicate(cfg, dist, tau, r); });

    ScenarioResult res;
    res.config = cfg;
    std::size_t rejects = 0, with_lambda = 0;
    double lambda_sum = 0.0;
    for (const Outcome& o : outcomes) {
        rejects += o.reject ? 1 : 0;
        res.errors += o.error ? 1 : 0;
        if (o.has_lambda) {
            ++with_lambda;
            lambda_sum += o.lambda;
        }
    }
    if (static_cast<double>(res.errors) > 0.01 * static_cast<double>(cfg.reps)) {
        throw Error(ErrorCode::TooManyFailures, std::to_string(res.errors) + " of " + std::to_string(cfg.reps) +
                                                    " replicates failed in scenario " + cfg.dist.to_string());
    }
    const double reps = static_cast<double>(cfg.reps);
    res.reject_proportion = static_cast<double>(rejects) / reps;
    res.mc_stderr = std::sqrt(res.reject_proportion * (1.0 - res.reject_proportion) / reps);
    res.mean_lambda = with_lambda > 0 ? lambda_sum / static_cast<double>(with_lambda) : std::nan("");
    res.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

ResultFormat format_for(const std::filesystem::path& path)
{
    return path.extension() == ".json" ? ResultFormat::Json : ResultFormat::Csv;
}

std::string csv_row(const ScenarioResult& r)
{
    return csv_key(r.config) + ',' + format_double(r.reject_proportion) + ',' + format_double(r.mc_stderr) + ',' +
           format_double(r.mean_lambda) + ',' + format_double(r.runtime_seconds);
}

ScenarioResult parse_csv_row(std::string_view line)
{
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 12) {
        throw Error(ErrorCode::ParseError, "expected 12 CSV fields, got " + std::to_string(f.size()));
    }
    ScenarioResult r;
    ScenarioConfig& c = r.config;
    c.dist = parse_spec(f[0]);
    c.n = parse_number<std::size_t>(f[1], "n");
    c.cls = HypothesisClass::parse(f[2]);
    c.method = parse_method(f[3]);
    c.reps = parse_number<std::size_t>(f[4], "reps");
    c.B = parse_number<std::size_t>(f[5], "B");
    c.alpha = parse_number<double>(f[6], "alpha");
    c.seed = parse_number<std::uint64_t>(f[7], "seed");
    r.reject_proportion = parse_number<double>(f[8], "reject_proportion");
    r.mc_stderr = parse_number<double>(f[9], "mc_stderr");
    r.mean_lambda = f[10] == "nan" ? std::nan("") : parse_number<double>(f[10], "mean_lambda");
    r.runtime_seconds = parse_number<double>(f[11], "runtime_seconds");
    return r;
}

Json scenario_result_to_json(const ScenarioResult& r)
{
    const ScenarioConfig& c = r.config;
    Json j{{"dist", c.dist.to_string()},
           {"n", c.n},
           {"class", c.cls.to_string()},
           {"method", to_string(c.method)},
           {"reps", c.reps},
           {"B", c.method == Method::Bootstrap ? c.B : 0},
           {"alpha", c.alpha},
           {"seed", c.seed},
           {"reject_proportion", r.reject_proportion},
           {"mc_stderr", r.mc_stderr},
           {"mean_lambda", r.mean_lambda},
           {"runtime_seconds", r.runtime_seconds},
           {"errors", r.errors}};
    if (c.tau) {
        j["tau"] = *c.tau;
    }
    return j;
}

namespace {

ScenarioConfig config_from_json(const Json& j)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::ParseError, "scenario entries must be objects");
    }
    auto get = [&](const char* key) -> const Json& {
        if (!j.contains(key)) {
            throw Error(ErrorCode::ParseError, std::string("scenario is missing '") + key + "'");
        }
        return j.at(key);
    };
    ScenarioConfig c;
    try {
        c.dist = parse_spec(get("dist").get<std::string>());
        c.n = get("n").get<std::size_t>();
        c.cls = HypothesisClass::parse(get("class").get<std::string>());
        c.method = j.contains("method") ? parse_method(j.at("method").get<std::string>()) : Method::Asymptotic;
        if (j.contains("reps")) {
            c.reps = j.at("reps").get<std::size_t>();
        }
        if (j.contains("B")) {
            c.B = j.at("B").get<std::size_t>();
        }
        if (j.contains("alpha")) {
            c.alpha = j.at("alpha").get<double>();
        }
        if (j.contains("seed")) {
            c.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("workers")) {
            c.workers = j.at("workers").get<unsigned>();
        }
        if (j.contains("tau") && !j.at("tau").is_null()) {
            c.tau = j.at("tau").get<double>();
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad scenario field: ") + e.what());
    }
    if (c.method != Method::Bootstrap) {
        c.B = 0;
    }
    c.validate();
    return c;
}

}  // namespace

ScenarioResult scenario_result_from_json(const Json& j)
{
    ScenarioResult r;
    r.config = config_from_json(j);
    try {
        r.reject_proportion = j.at("reject_proportion").get<double>();
        r.mc_stderr = j.at("mc_stderr").get<double>();
        r.mean_lambda = j.at("mean_lambda").is_null() ? std::nan("") : j.at("mean_lambda").get<double>();
        r.runtime_seconds = j.at("runtime_seconds").get<double>();
        r.errors = j.value("errors", std::size_t{0});
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad result field: ") + e.what());
    }
    return r;
}

void write_results(const std::vector<ScenarioResult>& results, ResultFormat format, const std::filesystem::path& path)
{
    if (format == ResultFormat::Csv) {
        std::string text(kCsvHeader);
        text += '\n';
        for (const auto& r : results) {
            text += csv_row(r) + '\n';
        }
        write_text(path, text, false);
    } else {
        Json arr = Json::array();
        for (const auto& r : results) {
            arr.push_back(scenario_result_to_json(r));
        }
        write_text(path, arr.dump(2) + '\n', false);
    }
}

std::vector<ScenarioResult> run_suite(const std::vector<ScenarioConfig>& scenarios, const std::filesystem::path& out,
                                      bool resume, std::ostream* progress)
{
    if (scenarios.empty()) {
        throw Error(ErrorCode::InvalidArgument, "scenario list is empty");
    }
    const ResultFormat format = format_for(out);

    std::vector<ScenarioResult> done;  // rows already on disk
    std::vector<std::string> done_lines;
    if (resume && std::filesystem::exists(out)) {
        const std::string text = read_text(out);
        if (format == ResultFormat::Csv) {
            // Drop a torn final line left by an interrupted write.
            const std::size_t end = text.rfind('\n');
            std::string_view body(text.data(), end == std::string::npos ? 0 : end + 1);
            std::size_t pos = body.find('\n');
            if (pos != std::string_view::npos && body.substr(0, pos) == kCsvHeader) {
                for (std::size_t start = pos + 1; start < body.size();) {
                    const std::size_t nl = body.find('\n', start);
                    const std::string_view line = body.substr(start, nl - start);
                    if (!line.empty()) {
                        done.push_back(parse_csv_row(line));
                        done_lines.emplace_back(line);
                    }
                    start = nl + 1;
                }
            }
            if (end != std::string::npos && end + 1 != text.size()) {
                write_text(out, std::string(body), false);
            }
        } else {
            try {
                for (const Json& j : Json::parse(text)) {
                    done.push_back(scenario_result_from_json(j));
                }
            } catch (const Json::exception& e) {
                throw Error(ErrorCode::ParseError, "cannot resume from " + out.string() + ": " + e.what());
            }
        }
    }
    if (format == ResultFormat::Csv && done_lines.empty()) {
        write_text(out, std::string(kCsvHeader) + '\n', false);
    }

    std::vector<ScenarioResult> results;
    std::vector<ScenarioResult> on_disk = done;
    for (std::size_t idx = 0; idx < scenarios.size(); ++idx) {
        const ScenarioConfig& cfg = scenarios[idx];
        auto hit = std::find_if(done.begin(), done.end(),
                                [&](const ScenarioResult& r) { return same_config(r.config, cfg); });
        if (hit != done.end()) {
            ScenarioResult reused = *hit;
            reused.config.workers = cfg.workers;
            reused.config.tau = cfg.tau;
            results.push_back(reused);
            if (progress) {
                *progress << "[" << idx + 1 << "/" << scenarios.size() << "] " << cfg.dist.to_string() << " n=" << cfg.n
                          << " " << cfg.cls.to_string() << ": reused\n";
            }
            continue;
        }
        ScenarioResult r = run_scenario(cfg);
        results.push_back(r);
        on_disk.push_back(r);
        if (format == ResultFormat::Csv) {
            write_text(out, csv_row(r) + '\n', true);
        } else {
            write_results(on_disk, ResultFormat::Json, out);
        }
        if (progress) {
            *progress << "[" << idx + 1 << "/" << scenarios.size() << "] " << cfg.dist.to_string() << " n=" << cfg.n
                      << " " << cfg.cls.to_string() << " " << to_string(cfg.method)
                      << ": reject=" << format_double(r.reject_proportion) << " ("
                      << format_double(r.runtime_seconds) << "s)\n";
        }
    }
    return results;
}

std::vector<ScenarioConfig> parse_suite(std::string_view text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw Error(ErrorCode::ParseError, "malformed suite JSON at line " + std::to_string(line) + ", column " +
                                               std::to_string(col));
    }
    if (!doc.is_array()) {
        throw Error(ErrorCode::ParseError, "suite must be a JSON array of scenarios");
    }
    std::vector<ScenarioConfig> out;
    for (const Json& j : doc) {
        out.push_back(config_from_json(j));
    }
    return out;
}

std::vector<ScenarioConfig> read_suite_file(const std::filesystem::path& path)
{
    return parse_suite(read_text(path));
}

}  // namespace shapetest

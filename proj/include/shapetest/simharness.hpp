#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "shapetest/distributions.hpp"
#include "shapetest/npmle.hpp"
#include "shapetest/nplrt.hpp"
#include "shapetest/serialize.hpp"

namespace shapetest {

struct ScenarioConfig {
    DistSpec dist;
    std::size_t n = 100;
    HypothesisClass cls = HypothesisClass::monotone();
    Method method = Method::Asymptotic;
    std::size_t reps = 1000;
    std::size_t B = 200;  // bootstrap only
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0 = default_workers()
    // Left endpoint handed to the test. Unset: 0 for monotone-family classes,
    // the distribution's finite lower bound (if any) for log-concave.
    std::optional<double> tau;

    void validate() const;
    std::optional<double> resolved_tau() const;
};

struct ScenarioResult {
    ScenarioConfig config;
    double reject_proportion = 0.0;
    double mc_stderr = 0.0;
    double mean_lambda = 0.0;
    double runtime_seconds = 0.0;
    std::size_t errors = 0;  // replicates that raised a non-support error
};

// Replicate r draws n points with stream (seed, r), runs the test and records
// the decision at alpha. Samples that fall outside the class's support (a draw
// at or below tau, or a non-positive draw for half-line classes) count as
// rejections. Other errors are counted; more than 1% aborts with
// TooManyFailures.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

enum class ResultFormat { Csv, Json };

// Csv unless the path ends in ".json".
ResultFormat format_for(const std::filesystem::path& path);

// Runs scenarios in order, persisting after each one. With `resume`, rows of
// an existing output file whose configuration matches a scenario are reused
// verbatim instead of recomputed.
std::vector<ScenarioResult> run_suite(const std::vector<ScenarioConfig>& scenarios, const std::filesystem::path& out,
                                      bool resume = false, std::ostream* progress = nullptr);

void write_results(const std::vector<ScenarioResult>& results, ResultFormat format, const std::filesystem::path& path);

inline constexpr std::string_view kCsvHeader =
    "dist,n,class,method,reps,B,alpha,seed,reject_proportion,mc_stderr,mean_lambda,runtime_seconds";

std::string csv_row(const ScenarioResult& r);
ScenarioResult parse_csv_row(std::string_view line);

Json scenario_result_to_json(const ScenarioResult& r);
ScenarioResult scenario_result_from_json(const Json& j);

// JSON array of objects with keys dist, n, class, method, reps, B, alpha,
// seed and optionally workers, tau. Throws ParseError with line and column.
std::vector<ScenarioConfig> parse_suite(std::string_view text);
std::vector<ScenarioConfig> read_suite_file(const std::filesystem::path& path);

}  // namespace shapetest

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "shapetest/cli.hpp"
#include "shapetest/serialize.hpp"
#include "test_util.hpp"

using namespace shapetest;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "shapetest");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path dir()
{
    const fs::path d = fs::temp_directory_path() / "shapetest_cli_tests";
    fs::create_directories(d);
    return d;
}

std::string write_sample(const std::string& name, const std::vector<double>& v)
{
    const fs::path p = dir() / name;
    std::ofstream f(p);
    f.precision(17);
    for (double x : v) {
        f << x << '\n';
    }
    return p.string();
}

std::string write_text(const std::string& name, const std::string& text)
{
    const fs::path p = dir() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, FitMonotoneWritesStepDensity)
{
    const auto input = write_sample("exp.txt", testutil::draws("Exp(1)", 100, 1));
    const auto r = cli({"fit", "--input", input, "--class", "monotone", "--tau", "0", "--seed", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["type"], "step");
    EXPECT_EQ(j["class"], "monotone");
    EXPECT_TRUE(j["report"]["converged"].get<bool>());
    EXPECT_NE(r.err.find("seed: 1"), std::string::npos);
    EXPECT_NO_THROW(density_from_json(j));
}

TEST(Cli, FitLogConcaveToFile)
{
    const auto input = write_sample("normal.txt", testutil::draws("Normal(0,1)", 80, 2));
    const auto out = (dir() / "lc.json").string();
    const auto r = cli({"fit", "--input", input, "--class", "logconcave", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(Json::parse(slurp(out))["type"], "piecewise_log_linear");
}

TEST(Cli, TestBootstrapReportsCriticalValues)
{
    const auto input = write_sample("exp2.txt", testutil::draws("Exp(1)", 60, 3));
    const auto r = cli({"test", "--input", input, "--class", "monotone", "--tau", "0", "--method", "bootstrap", "--B",
                        "40", "--seed", "9", "--workers", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["method"], "bootstrap");
    EXPECT_EQ(j["bootstrap"]["critical_values"].size(), 3u);
    EXPECT_EQ(j["seed"], 9);
    EXPECT_TRUE(r.err.find("reject H0") != std::string::npos || r.err.find("do not reject H0") != std::string::npos);
}

TEST(Cli, SameSeedGivesIdenticalOutput)
{
    const auto input = write_sample("exp3.txt", testutil::draws("Exp(1)", 50, 4));
    const std::vector<std::string> args{"test", "--input", input, "--class", "kmono:2", "--tau", "0", "--method",
                                        "bootstrap", "--B", "20", "--seed", "77"};
    const auto a = cli(args);
    const auto b = cli(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, UsageErrorsExitTwo)
{
    const auto input = write_sample("exp4.txt", testutil::draws("Exp(1)", 20, 5));
    EXPECT_EQ(cli({"fit", "--input", input, "--class", "monotone"}).code, 2);
    EXPECT_EQ(cli({"fit", "--input", input, "--class", "cm", "--tau", "1"}).code, 2);
    EXPECT_EQ(cli({"fit", "--input", input, "--class", "unimodal", "--tau", "0"}).code, 2);
    EXPECT_EQ(cli({"test", "--input", input, "--class", "monotone", "--tau", "0", "--method", "exact"}).code, 2);
    EXPECT_EQ(cli({"fit", "--class", "monotone", "--tau", "0"}).code, 2);
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, DomainErrorsExitOne)
{
    const auto ties = write_text("ties.txt", "1.0\n2.0\n2.0\n");
    const auto r = cli({"fit", "--input", ties, "--class", "monotone", "--tau", "0"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("TiesDetected"), std::string::npos) << r.err;
    EXPECT_EQ(cli({"fit", "--input", ties, "--class", "monotone", "--tau", "0", "--jitter", "1e-9"}).code, 0);

    const auto neg = write_text("neg.txt", "-1.0\n2.0\n3.0\n");
    EXPECT_EQ(cli({"fit", "--input", neg, "--class", "cm", "--tau", "0"}).code, 1);
    EXPECT_EQ(cli({"fit", "--input", (dir() / "missing.txt").string(), "--class", "logconcave"}).code, 1);

    const auto bad = write_text("bad_suite.json", "[{\"dist\": \"Exp(1)\",]");
    const auto s = cli({"simulate", "--config", bad, "--out", (dir() / "never.csv").string()});
    EXPECT_EQ(s.code, 1);
    EXPECT_NE(s.err.find("line 1, column"), std::string::npos) << s.err;
}

TEST(Cli, SimulateAndResume)
{
    const auto cfg = write_text("suite.json", R"js([
  {"dist": "Exp(1)", "n": 40, "class": "monotone", "method": "asymptotic", "reps": 5, "seed": 1},
  {"dist": "Beta(2,1)", "n": 40, "class": "monotone", "method": "asymptotic", "reps": 5, "seed": 2}
])js");
    const auto out = dir() / "sim.csv";
    fs::remove(out);
    const auto a = cli({"simulate", "--config", cfg, "--out", out.string(), "--workers", "1"});
    ASSERT_EQ(a.code, 0) << a.err;
    const std::string first = slurp(out);
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 3);
    const auto b = cli({"simulate", "--config", cfg, "--out", out.string(), "--resume"});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(slurp(out), first);
    EXPECT_NE(b.err.find("reused"), std::string::npos);
}

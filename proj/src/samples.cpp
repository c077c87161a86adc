#include "shapetest/samples.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "shapetest/error.hpp"

namespace shapetest {

namespace {

bool has_ties(const std::vector<double>& sorted)
{
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

}  // namespace

SortedSample::SortedSample(std::vector<double> z, std::optional<double> tau) : z_(std::move(z)), tau_(tau)
{
    if (z_.empty()) {
        throw Error(ErrorCode::TooFewObservations, "sorted sample is empty");
    }
    for (std::size_t i = 0; i < z_.size(); ++i) {
        if (!std::isfinite(z_[i])) {
            throw Error(ErrorCode::NonFiniteValue, "non-finite order statistic", i);
        }
        if (i > 0 && !(z_[i - 1] < z_[i])) {
            throw Error(ErrorCode::TiesDetected, "order statistics are not strictly increasing", i);
        }
    }
    if (tau_) {
        if (!std::isfinite(*tau_)) {
            throw Error(ErrorCode::InvalidArgument, "tau must be finite");
        }
        if (!(*tau_ < z_.front())) {
            throw Error(ErrorCode::TauNotBelowMinimum, "tau must lie strictly below the smallest observation");
        }
    }
}

RawSample ingest(std::span<const double> values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorCode::NonFiniteValue, "observation " + std::to_string(i) + " is not finite", i);
        }
    }
    if (values.size() < 2) {
        throw Error(ErrorCode::TooFewObservations, "at least two observations are required");
    }
    return RawSample{std::vector<double>(values.begin(), values.end())};
}

SortedSample to_sorted(const RawSample& raw, std::optional<double> tau, TiePolicy ties, RngStream* rng)
{
    std::vector<double> z = raw.values;
    std::sort(z.begin(), z.end());
    if (tau && !(*tau < z.front())) {
        throw Error(ErrorCode::TauNotBelowMinimum, "tau must lie strictly below the smallest observation");
    }
    if (has_ties(z)) {
        if (ties.kind == TiePolicy::Kind::Error) {
            throw Error(ErrorCode::TiesDetected, "duplicate observations; log-spacings would be -inf");
        }
        if (!(ties.scale > 0.0) || !std::isfinite(ties.scale)) {
            throw Error(ErrorCode::InvalidArgument, "jitter scale must be positive");
        }
        if (rng == nullptr) {
            throw Error(ErrorCode::InvalidArgument, "jitter policy requires a random stream");
        }
        for (int pass = 0; pass < 64 && has_ties(z); ++pass) {
            std::vector<bool> tied(z.size(), false);
            for (std::size_t i = 1; i < z.size(); ++i) {
                if (z[i] == z[i - 1]) {
                    tied[i] = tied[i - 1] = true;
                }
            }
            for (std::size_t i = 0; i < z.size(); ++i) {
                if (tied[i]) {
                    z[i] += ties.scale * rng->uniform01();
                }
            }
            std::sort(z.begin(), z.end());
        }
        if (has_ties(z)) {
            throw Error(ErrorCode::TiesDetected, "jitter failed to break ties; increase the scale");
        }
    }
    return SortedSample(std::move(z), tau);
}

std::vector<double> spacings(const SortedSample& s, bool include_origin)
{
    auto z = s.z();
    std::vector<double> out;
    out.reserve(z.size());
    if (include_origin) {
        if (!s.tau()) {
            throw Error(ErrorCode::MissingTau, "spacings from the origin need a known tau");
        }
        out.push_back(z[0] - *s.tau());
    }
    for (std::size_t i = 1; i < z.size(); ++i) {
        out.push_back(z[i] - z[i - 1]);
    }
    return out;
}

std::vector<double> parse_sample_text(std::string_view text)
{
    std::vector<double> values;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string_view::npos || line[b] == '#') {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        line.remove_prefix(b);
        std::size_t e = line.find_first_of(", \t\r;");
        std::string_view field = line.substr(0, e);
        if (!field.empty() && field.front() == '+') {
            field.remove_prefix(1);
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size()) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
        }
        values.push_back(v);
        if (end == text.size()) {
            break;
        }
    }
    return values;
}

std::vector<double> read_sample_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sample_text(buf.str());
}

}  // namespace shapetest

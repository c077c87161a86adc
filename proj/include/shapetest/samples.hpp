#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "shapetest/rng.hpp"

namespace shapetest {

// Validated observations in their original order.
struct RawSample {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
};

// Strictly increasing order statistics Z_1 < ... < Z_n, optionally with a
// known finite left endpoint tau that plays the role of Z_0.
class SortedSample {
public:
    // Validates strict monotonicity and tau < z.front().
    SortedSample(std::vector<double> z, std::optional<double> tau);

    std::span<const double> z() const noexcept { return z_; }
    const std::vector<double>& values() const noexcept { return z_; }
    std::optional<double> tau() const noexcept { return tau_; }
    std::size_t n() const noexcept { return z_.size(); }
    double front() const { return z_.front(); }
    double back() const { return z_.back(); }

    SortedSample with_tau(std::optional<double> tau) const { return SortedSample(z_, tau); }

private:
    std::vector<double> z_;
    std::optional<double> tau_;
};

struct TiePolicy {
    enum class Kind { Error, Jitter };
    Kind kind = Kind::Error;
    double scale = 0.0;

    static TiePolicy error() { return {}; }
    static TiePolicy jitter(double scale) { return {Kind::Jitter, scale}; }
};

RawSample ingest(std::span<const double> values);

// Sorts and validates. Under the jitter policy, tied values receive
// Uniform(0, scale) noise drawn from `rng` until the sample is tie-free.
SortedSample to_sorted(const RawSample& raw, std::optional<double> tau = std::nullopt,
                       TiePolicy ties = TiePolicy::error(), RngStream* rng = nullptr);

// Z_i - Z_{i-1}: i = 1..n using Z_0 = tau when include_origin, else i = 2..n.
std::vector<double> spacings(const SortedSample& s, bool include_origin);

// One observation per line; only the first comma/whitespace-separated field
// is read; blank lines and lines starting with '#' are skipped.
std::vector<double> parse_sample_text(std::string_view text);
std::vector<double> read_sample_file(const std::filesystem::path& path);

}  // namespace shapetest

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace shapetest {

// SplitMix64 finalizer; used to turn (seed, counter) tuples into stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive the key of a sub-stream from a base seed and a path of counters,
// e.g. stream_key(seed, {replicate, bootstrap_index}). The result depends
// only on its arguments, so replicates can run in any order.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t key = mix64(seed);
    for (std::uint64_t c : path) {
        key = mix64(key ^ mix64(c + 0x632be59bd9b4e019ULL));
    }
    return key;
}

// A random stream addressed by a 64-bit key. Satisfies
// UniformRandomBitGenerator so it can drive <random> distributions.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t key) : key_(key)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                          static_cast<std::uint32_t>(mix64(key)), static_cast<std::uint32_t>(mix64(key) >> 32)};
        engine_.seed(seq);
    }

    static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    {
        return RngStream(stream_key(seed, path));
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    // Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform01()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
};

}  // namespace shapetest

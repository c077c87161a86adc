// The vector kernels must agree with the scalar reference loops up to
// reassociation error on every input shape, including remainders that do not
// fill a full register and arguments at the edge of the exp/log ranges.

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "shapetest/error.hpp"
#include "shapetest/kernels.hpp"
#include "shapetest/rng.hpp"

using namespace shapetest;
namespace k = shapetest::kernels;

namespace {

std::vector<double> draws(std::size_t n, std::uint64_t seed, double lo, double hi)
{
    RngStream rng(seed);
    std::vector<double> v(n);
    for (double& x : v) {
        x = lo + (hi - lo) * rng.uniform01();
    }
    return v;
}

}  // namespace

TEST(Dispatch, ScalarAlwaysAvailable)
{
    EXPECT_TRUE(k::isa_supported(k::Isa::Scalar));
    const k::Isa before = k::active_isa();
    k::set_isa(k::Isa::Scalar);
    EXPECT_EQ(k::active_isa(), k::Isa::Scalar);
    k::set_isa(before);
    EXPECT_EQ(k::isa_name(k::Isa::Avx2), "avx2");
}

TEST(ScalarKernels, SmallHandValues)
{
    const std::vector<double> x{1.0, std::exp(1.0), std::exp(2.0)};
    EXPECT_NEAR(k::scalar::sum_log(x), 3.0, 1e-15);

    // out[j] = sum_i c_i max(1 - s_j v_i, 0)^2
    const std::vector<double> s{0.5, 2.0};
    const std::vector<double> v{1.0, 0.25};
    const std::vector<double> c{1.0, 2.0};
    std::vector<double> out(2);
    k::scalar::truncated_power_sum(s, v, c, 2, out);
    EXPECT_DOUBLE_EQ(out[0], 0.25 + 2.0 * 0.875 * 0.875);
    EXPECT_DOUBLE_EQ(out[1], 0.0 + 2.0 * 0.25);

    k::scalar::exp_sum(s, v, c, out);
    EXPECT_DOUBLE_EQ(out[0], std::exp(-0.5) + 2.0 * std::exp(-0.125));
    EXPECT_DOUBLE_EQ(out[1], std::exp(-2.0) + 2.0 * std::exp(-0.5));
}

#ifdef SHAPETEST_HAVE_AVX2_KERNELS

class Avx2Equivalence : public ::testing::Test {
protected:
    void SetUp() override
    {
        if (!k::isa_supported(k::Isa::Avx2)) {
            GTEST_SKIP() << "CPU lacks AVX2/FMA";
        }
    }
};

TEST_F(Avx2Equivalence, SumLog)
{
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 1003u}) {
        for (auto [lo, hi] : {std::pair{1e-300, 1e-290}, std::pair{1e-6, 1.0}, std::pair{0.5, 2.0},
                              std::pair{1.0, 1e300}}) {
            const auto x = draws(n, n + 1, lo, hi);
            const double ref = k::scalar::sum_log(x);
            const double vec = k::avx2::sum_log(x);
            EXPECT_NEAR(vec, ref, 1e-14 * (1.0 + std::abs(ref)) + 4e-16 * n * 700) << "n=" << n << " lo=" << lo;
        }
    }
}

TEST_F(Avx2Equivalence, SumLogSubnormalAndExactValues)
{
    const std::vector<double> x{1.0, 2.0, 4.9e-324, 0.5, 1e-310, 8.0, 3.0};
    EXPECT_NEAR(k::avx2::sum_log(x), k::scalar::sum_log(x), 1e-12);
    const std::vector<double> ones(9, 1.0);
    EXPECT_EQ(k::avx2::sum_log(ones), 0.0);
}

TEST_F(Avx2Equivalence, TruncatedPowerSum)
{
    for (int p : {0, 1, 2, 3, 5}) {
        for (std::size_t m : {1u, 3u, 4u, 7u, 64u, 1001u}) {
            const auto s = draws(m, 100 + m, 0.1, 3.0);
            const auto v = draws(211, 200 + p, 0.0, 1.0);
            const auto c = draws(211, 300 + p, 0.0, 1.0);
            std::vector<double> ref(m), vec(m);
            k::scalar::truncated_power_sum(s, v, c, p, ref);
            k::avx2::truncated_power_sum(s, v, c, p, vec);
            for (std::size_t j = 0; j < m; ++j) {
                EXPECT_NEAR(vec[j], ref[j], 1e-12 * (1.0 + std::abs(ref[j]))) << "p=" << p << " j=" << j;
            }
        }
    }
}

TEST_F(Avx2Equivalence, TruncatedPowerSumBoundary)
{
    // 1 - s v == 0 exactly must contribute nothing, also for p = 0.
    const std::vector<double> s{1.0, 0.5, 2.0, 4.0, 1.0};
    const std::vector<double> v{1.0, 2.0, 0.5, 0.25};
    const std::vector<double> c{1.0, 1.0, 1.0, 1.0};
    std::vector<double> ref(5), vec(5);
    for (int p : {0, 1, 2}) {
        k::scalar::truncated_power_sum(s, v, c, p, ref);
        k::avx2::truncated_power_sum(s, v, c, p, vec);
        for (std::size_t j = 0; j < s.size(); ++j) {
            EXPECT_NEAR(vec[j], ref[j], 1e-14) << "p=" << p;
        }
    }
}

TEST_F(Avx2Equivalence, ExpSum)
{
    for (std::size_t m : {1u, 2u, 4u, 6u, 129u, 1000u}) {
        const auto s = draws(m, 400 + m, 1e-3, 50.0);
        const auto v = draws(333, 500, 0.0, 20.0);
        const auto c = draws(333, 600, 0.0, 1.0);
        std::vector<double> ref(m), vec(m);
        k::scalar::exp_sum(s, v, c, ref);
        k::avx2::exp_sum(s, v, c, vec);
        for (std::size_t j = 0; j < m; ++j) {
            EXPECT_NEAR(vec[j], ref[j], 1e-13 * std::abs(ref[j]) + 1e-300) << "j=" << j;
        }
    }
}

TEST_F(Avx2Equivalence, ExpSumUnderflow)
{
    // Arguments beyond the double range underflow to zero in both paths.
    const std::vector<double> s{1.0, 10.0, 100.0, 800.0, 1e5};
    const std::vector<double> v{1.0, 7.0, 7.09e2};
    const std::vector<double> c{1.0, 1.0, 1.0};
    std::vector<double> ref(5), vec(5);
    k::scalar::exp_sum(s, v, c, ref);
    k::avx2::exp_sum(s, v, c, vec);
    for (std::size_t j = 0; j < s.size(); ++j) {
        EXPECT_NEAR(vec[j], ref[j], 1e-13 * std::abs(ref[j]) + 1e-300) << "j=" << j;
    }
    EXPECT_EQ(vec[4], 0.0);
}

TEST_F(Avx2Equivalence, DispatchedCallsFollowSelection)
{
    const auto x = draws(101, 9, 0.1, 10.0);
    const k::Isa before = k::active_isa();
    k::set_isa(k::Isa::Scalar);
    const double a = k::sum_log(x);
    k::set_isa(k::Isa::Avx2);
    const double b = k::sum_log(x);
    k::set_isa(before);
    EXPECT_EQ(a, k::scalar::sum_log(x));
    EXPECT_EQ(b, k::avx2::sum_log(x));
}

#endif

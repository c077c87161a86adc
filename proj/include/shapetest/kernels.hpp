#pragma once

// Data-parallel inner loops shared by the solvers and statistics.
//
// Each kernel has a scalar reference implementation (namespace `scalar`) and,
// on x86-64, an AVX2+FMA implementation (namespace `avx2`). The unqualified
// entry points dispatch at runtime to the best variant the CPU supports. The
// choice can be pinned with set_isa() or the SHAPETEST_SIMD environment
// variable (`scalar`, `avx2` or `auto`).
//
// Variants agree to floating-point reassociation error, not bit-for-bit:
// the vector paths use lane-parallel accumulation and FMA.

#include <span>
#include <string_view>

namespace shapetest::kernels {

enum class Isa { Scalar, Avx2 };

bool isa_supported(Isa isa);
Isa active_isa();
// Throws Error(InvalidArgument) if the CPU or build lacks `isa`.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

// sum_i log(x_i). Expects x_i > 0.
double sum_log(std::span<const double> x);

// out[j] = sum_i c_i * max(1 - s_j * v_i, 0)^p,  p >= 0.
void truncated_power_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c, int p,
                         std::span<double> out);

// out[j] = sum_i c_i * exp(-s_j * v_i).
void exp_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c,
             std::span<double> out);

namespace scalar {
double sum_log(std::span<const double> x);
void truncated_power_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c, int p,
                         std::span<double> out);
void exp_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c,
             std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SHAPETEST_HAVE_AVX2_KERNELS 1
namespace avx2 {
double sum_log(std::span<const double> x);
void truncated_power_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c, int p,
                         std::span<double> out);
void exp_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c,
             std::span<double> out);
}  // namespace avx2
#endif

}  // namespace shapetest::kernels

#include <atomic>
#include <cstdlib>
#include <string>

#include "shapetest/error.hpp"
#include "shapetest/kernels.hpp"

namespace shapetest::kernels {

namespace {

struct Table {
    Isa isa;
    double (*sum_log)(std::span<const double>);
    void (*truncated_power_sum)(std::span<const double>, std::span<const double>, std::span<const double>, int,
                                std::span<double>);
    void (*exp_sum)(std::span<const double>, std::span<const double>, std::span<const double>, std::span<double>);
};

constexpr Table scalar_table{Isa::Scalar, &scalar::sum_log, &scalar::truncated_power_sum, &scalar::exp_sum};
#ifdef SHAPETEST_HAVE_AVX2_KERNELS
constexpr Table avx2_table{Isa::Avx2, &avx2::sum_log, &avx2::truncated_power_sum, &avx2::exp_sum};
#endif

bool cpu_has_avx2()
{
#if defined(SHAPETEST_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table* table_for(Isa isa)
{
#ifdef SHAPETEST_HAVE_AVX2_KERNELS
    if (isa == Isa::Avx2) {
        return &avx2_table;
    }
#endif
    (void)isa;
    return &scalar_table;
}

const Table* initial_table()
{
    const char* env = std::getenv("SHAPETEST_SIMD");
    std::string want = env ? env : "auto";
    if (want == "scalar") {
        return &scalar_table;
    }
    return cpu_has_avx2() ? table_for(Isa::Avx2) : &scalar_table;
}

std::atomic<const Table*>& current()
{
    static std::atomic<const Table*> t{initial_table()};
    return t;
}

}  // namespace

bool isa_supported(Isa isa)
{
    return isa == Isa::Scalar || (isa == Isa::Avx2 && cpu_has_avx2());
}

Isa active_isa() { return current().load(std::memory_order_acquire)->isa; }

void set_isa(Isa isa)
{
    if (!isa_supported(isa)) {
        throw Error(ErrorCode::InvalidArgument, std::string("instruction set not available: ") + std::string(isa_name(isa)));
    }
    current().store(table_for(isa), std::memory_order_release);
}

std::string_view isa_name(Isa isa)
{
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

double sum_log(std::span<const double> x)
{
    return current().load(std::memory_order_acquire)->sum_log(x);
}

void truncated_power_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c, int p,
                         std::span<double> out)
{
    current().load(std::memory_order_acquire)->truncated_power_sum(s, v, c, p, out);
}

void exp_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c,
             std::span<double> out)
{
    current().load(std::memory_order_acquire)->exp_sum(s, v, c, out);
}

}  // namespace shapetest::kernels

#include <cmath>

#include "shapetest/kernels.hpp"

namespace shapetest::kernels::scalar {

double sum_log(std::span<const double> x)
{
    double acc = 0.0;
    for (double v : x) {
        acc += std::log(v);
    }
    return acc;
}

void truncated_power_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c, int p,
                         std::span<double> out)
{
    for (std::size_t j = 0; j < s.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            double t = 1.0 - s[j] * v[i];
            if (t <= 0.0) {
                continue;
            }
            double tp = 1.0;
            for (int e = 0; e < p; ++e) {
                tp *= t;
            }
            acc += c[i] * tp;
        }
        out[j] = acc;
    }
}

void exp_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c,
             std::span<double> out)
{
    for (std::size_t j = 0; j < s.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            acc += c[i] * std::exp(-s[j] * v[i]);
        }
        out[j] = acc;
    }
}

}  // namespace shapetest::kernels::scalar

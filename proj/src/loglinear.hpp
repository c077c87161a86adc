#pragma once

// Integrals of exp of a linear function over the unit interval, with the
// small-slope limit handled by series. With d = s - r:
//   j00(r,s) = int_0^1 exp((1-t) r + t s) dt
//   j10(r,s) = int_0^1 t exp(...) dt
//   j20(r,s) = int_0^1 t^2 exp(...) dt
// The mirrored integrals follow by symmetry, e.g. int (1-t) exp(...) = j10(s,r).

#include <cmath>

namespace shapetest::detail {

inline constexpr double kSeriesCutoff = 0.5;

inline double j00(double r, double s)
{
    const double d = s - r;
    if (std::abs(d) < kSeriesCutoff) {
        // sum_k d^k / (k+1)!
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 24; ++k) {
            term *= d / (k + 1);
            sum += term;
        }
        return std::exp(r) * sum;
    }
    return std::exp(r) * std::expm1(d) / d;
}

inline double j10(double r, double s)
{
    const double d = s - r;
    if (std::abs(d) < kSeriesCutoff) {
        // sum_k d^k / (k! (k+2))
        double fact = 1.0, pw = 1.0, sum = 0.5;
        for (int k = 1; k < 24; ++k) {
            fact *= k;
            pw *= d;
            sum += pw / (fact * (k + 2));
        }
        return std::exp(r) * sum;
    }
    return ((d - 1.0) * std::exp(s) + std::exp(r)) / (d * d);
}

inline double j20(double r, double s)
{
    const double d = s - r;
    if (std::abs(d) < kSeriesCutoff) {
        // sum_k d^k / (k! (k+3))
        double fact = 1.0, pw = 1.0, sum = 1.0 / 3.0;
        for (int k = 1; k < 24; ++k) {
            fact *= k;
            pw *= d;
            sum += pw / (fact * (k + 3));
        }
        return std::exp(r) * sum;
    }
    return ((d * d - 2.0 * d + 2.0) * std::exp(s) - 2.0 * std::exp(r)) / (d * d * d);
}

// Offset t in [0, width] at which the mass of exp(phi0 + slope*y) over
// [0, t] reaches `mass`.
inline double invert_segment(double phi0, double slope, double width, double mass)
{
    double t;
    const double scaled = mass * std::exp(-phi0);
    if (slope == 0.0) {
        t = scaled;
    } else {
        const double arg = scaled * slope;
        if (arg <= -1.0) {
            return width;
        }
        t = std::log1p(arg) / slope;
    }
    if (!(t >= 0.0)) {
        t = 0.0;
    }
    return t > width ? width : t;
}

}  // namespace shapetest::detail

#pragma once

// Internal numeric helpers shared by the density implementations.

#include <cmath>
#include <limits>

namespace shapetest::detail {

// Smallest x in [lo, hi] with cdf(x) >= u, located by bisection until the
// bracket stops shrinking or is narrower than abs_tol. cdf must be
// nondecreasing; an infinite endpoint is replaced by an expanding search.
template <class Cdf>
double bisect_quantile(const Cdf& cdf, double u, double lo, double hi, double abs_tol = 1e-12)
{
    if (!std::isfinite(hi)) {
        double step = std::isfinite(lo) ? std::max(1.0, std::abs(lo)) : 1.0;
        hi = (std::isfinite(lo) ? lo : 0.0) + step;
        while (cdf(hi) < u) {
            step *= 2.0;
            hi += step;
        }
    }
    if (!std::isfinite(lo)) {
        double step = std::max(1.0, std::abs(hi));
        lo = hi - step;
        while (cdf(lo) >= u) {
            step *= 2.0;
            lo -= step;
        }
    }
    for (int it = 0; it < 2000; ++it) {
        double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi || hi - lo <= abs_tol) {
            break;
        }
        if (cdf(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

}  // namespace shapetest::detail

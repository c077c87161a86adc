// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher
// after the CPU has been checked.

#include <immintrin.h>

#include <cfloat>
#include <cmath>

#include "shapetest/kernels.hpp"

namespace shapetest::kernels::avx2 {

namespace {

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Cephes-style exp: range reduction by ln 2 in two parts, then a (2,3) Pade
// approximant for e^r on |r| <= ln2/2. Inputs below the normal range give 0.
inline __m256d vexp(__m256d x)
{
    const __m256d lo = _mm256_set1_pd(-708.3964185322641);
    const __m256d hi = _mm256_set1_pd(709.0);
    const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.26177193074810590878E-4), rr,
                                _mm256_set1_pd(3.02994407707441961300E-2));
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
    p = _mm256_mul_pd(p, r);
    __m256d q = _mm256_fmadd_pd(_mm256_set1_pd(3.00198505138664455042E-6), rr,
                                _mm256_set1_pd(2.52448340349684104192E-3));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
    __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    __m128i ni = _mm256_cvtpd_epi32(n);
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(ni), _mm256_set1_epi64x(1023)), 52);
    __m256d res = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, res);
}

// Cephes-style log for positive normal inputs: split off the binary
// exponent, then log(1+m) = m - m^2/2 + m^3 P(m)/Q(m) on [sqrt(1/2)-1, sqrt(2)-1].
inline __m256d vlog(__m256d x)
{
    const __m256i bits = _mm256_castpd_si256(x);
    // Exponent field as an exact double via the 2^52 magic-number trick.
    const __m256i exp_field = _mm256_srli_epi64(bits, 52);
    const __m256d magic = _mm256_set1_pd(0x1.0p52);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_field, _mm256_castpd_si256(magic))), magic);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

    __m256i mbits = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                                    _mm256_set1_epi64x(0x3fe0000000000000LL));
    __m256d m = _mm256_castsi256_pd(mbits);  // [0.5, 1)

    const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
    m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), _mm256_set1_pd(1.0));

    const __m256d z = _mm256_mul_pd(m, m);
    __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.01875663804580931796E-4), m,
                                _mm256_set1_pd(4.97494994976747001425E-1));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.70579119878881725854E0));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.44989225341610930846E1));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.79368678507819816313E1));
    p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(7.70838733755885391666E0));
    __m256d q = _mm256_add_pd(m, _mm256_set1_pd(1.12873587189167450590E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(4.52279145837532221105E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(8.29875266912776603211E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(7.11544750618563894466E1));
    q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(2.31251620126765340583E1));

    __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
    y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), y);
    __m256d r = _mm256_add_pd(m, y);
    return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
}

}  // namespace

double sum_log(std::span<const double> x)
{
    const std::size_t n = x.size();
    const __m256d min_normal = _mm256_set1_pd(DBL_MIN);
    const __m256d max_finite = _mm256_set1_pd(DBL_MAX);
    __m256d acc = _mm256_setzero_pd();
    double tail = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x.data() + i);
        __m256d ok = _mm256_and_pd(_mm256_cmp_pd(v, min_normal, _CMP_GE_OQ), _mm256_cmp_pd(v, max_finite, _CMP_LE_OQ));
        if (_mm256_movemask_pd(ok) == 0xF) {
            acc = _mm256_add_pd(acc, vlog(v));
        } else {
            for (std::size_t k = i; k < i + 4; ++k) {
                tail += std::log(x[k]);
            }
        }
    }
    for (; i < n; ++i) {
        tail += std::log(x[i]);
    }
    return hsum(acc) + tail;
}

void truncated_power_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c, int p,
                         std::span<double> out)
{
    const std::size_t m = s.size();
    const std::size_t n = v.size();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        const __m256d sj = _mm256_loadu_pd(s.data() + j);
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n; ++i) {
            __m256d t = _mm256_max_pd(_mm256_fnmadd_pd(sj, _mm256_set1_pd(v[i]), one), zero);
            __m256d tp = one;
            for (int e = 0; e < p; ++e) {
                tp = _mm256_mul_pd(tp, t);
            }
            // t == 0 lanes must contribute nothing even when p == 0.
            tp = _mm256_and_pd(tp, _mm256_cmp_pd(t, zero, _CMP_GT_OQ));
            acc = _mm256_fmadd_pd(_mm256_set1_pd(c[i]), tp, acc);
        }
        _mm256_storeu_pd(out.data() + j, acc);
    }
    if (j < m) {
        scalar::truncated_power_sum(s.subspan(j), v, c, p, out.subspan(j));
    }
}

void exp_sum(std::span<const double> s, std::span<const double> v, std::span<const double> c,
             std::span<double> out)
{
    const std::size_t m = s.size();
    const std::size_t n = v.size();
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        const __m256d neg_sj = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_loadu_pd(s.data() + j));
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n; ++i) {
            __m256d e = vexp(_mm256_mul_pd(neg_sj, _mm256_set1_pd(v[i])));
            acc = _mm256_fmadd_pd(_mm256_set1_pd(c[i]), e, acc);
        }
        _mm256_storeu_pd(out.data() + j, acc);
    }
    if (j < m) {
        scalar::exp_sum(s.subspan(j), v, c, out.subspan(j));
    }
}

}  // namespace shapetest::kernels::avx2

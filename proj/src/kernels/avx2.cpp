// AVX2/FMA variants. This translation unit alone is built with -mavx2 -mfma;
// the dispatcher only routes here after a CPUID check.

#include <cmath>
#include <limits>

#include "skegtd/kernels.hpp"

#if defined(SKEGTD_HAVE_AVX2_TU)
#include <immintrin.h>

namespace skegtd::kernels::avx2 {
namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kMagic = 6755399441055744.0;  // 1.5 * 2^52

inline __m256i round_to_i64(__m256d n) {
    const __m256d m = _mm256_set1_pd(kMagic);
    return _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, m)), _mm256_castpd_si256(m));
}

inline __m256d i64_to_pd(__m256i v) {
    const __m256d m = _mm256_set1_pd(kMagic);
    return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(v, _mm256_castpd_si256(m))), m);
}

inline __m256d pow2i(__m256i n) {
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(n, _mm256_set1_epi64x(1023)), 52));
}

__m256d vexp(__m256d x) {
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2e)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

    // Taylor polynomial to degree 13, Horner with FMA.
    static constexpr double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0,
                                   1.0 / 3628800.0,    1.0 / 362880.0,    1.0 / 40320.0,
                                   1.0 / 5040.0,       1.0 / 720.0,       1.0 / 120.0,
                                   1.0 / 24.0,         1.0 / 6.0,         0.5,
                                   1.0,                1.0};
    __m256d p = _mm256_set1_pd(c[0]);
    for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));

    // 2^n as two factors so that subnormal results come out right.
    const __m256d nc = _mm256_max_pd(_mm256_min_pd(n, _mm256_set1_pd(1100.0)), _mm256_set1_pd(-1100.0));
    const __m256i ni = round_to_i64(nc);
    const __m256d h = _mm256_floor_pd(_mm256_mul_pd(nc, _mm256_set1_pd(0.5)));
    const __m256i hi = round_to_i64(h);
    const __m256i lo = _mm256_sub_epi64(ni, hi);
    __m256d res = _mm256_mul_pd(_mm256_mul_pd(p, pow2i(hi)), pow2i(lo));

    res = _mm256_blendv_pd(res, _mm256_setzero_pd(), _mm256_cmp_pd(x, _mm256_set1_pd(-745.2), _CMP_LT_OQ));
    res = _mm256_blendv_pd(res, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                           _mm256_cmp_pd(x, _mm256_set1_pd(709.78), _CMP_GT_OQ));
    res = _mm256_blendv_pd(res, _mm256_add_pd(x, x), _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
    return res;
}

__m256d vlog(__m256d x) {
    const __m256d tiny = _mm256_set1_pd(std::numeric_limits<double>::min());
    const __m256d is_sub = _mm256_cmp_pd(x, tiny, _CMP_LT_OQ);
    const __m256d xs = _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(4503599627370496.0)), is_sub);
    __m256i bits = _mm256_castpd_si256(xs);
    __m256i e = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
    const __m256i mant = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                                         _mm256_set1_epi64x(0x3FF0000000000000LL));
    __m256d m = _mm256_castsi256_pd(mant);
    __m256d ed = i64_to_pd(e);
    ed = _mm256_blendv_pd(ed, _mm256_sub_pd(ed, _mm256_set1_pd(52.0)), is_sub);
    const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    ed = _mm256_blendv_pd(ed, _mm256_add_pd(ed, _mm256_set1_pd(1.0)), big);

    const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
    const __m256d s = _mm256_div_pd(f, _mm256_add_pd(f, _mm256_set1_pd(2.0)));
    const __m256d s2 = _mm256_mul_pd(s, s);
    __m256d p = _mm256_set1_pd(1.0 / 23.0);
    for (int k = 21; k >= 1; k -= 2) p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / k));
    const __m256d lm = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), s), p);
    __m256d res = _mm256_fmadd_pd(ed, _mm256_set1_pd(kLn2Hi), _mm256_fmadd_pd(ed, _mm256_set1_pd(kLn2Lo), lm));

    const double inf = std::numeric_limits<double>::infinity();
    res = _mm256_blendv_pd(res, _mm256_set1_pd(-inf), _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ));
    res = _mm256_blendv_pd(res, _mm256_set1_pd(inf), _mm256_cmp_pd(x, _mm256_set1_pd(inf), _CMP_EQ_OQ));
    res = _mm256_blendv_pd(res, _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN()),
                           _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_NGE_UQ));
    return res;
}

// log(1 + t) for t >= 0 with the usual rounding correction.
__m256d vlog1p(__m256d t) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d y = _mm256_add_pd(one, t);
    const __m256d corr = _mm256_div_pd(_mm256_sub_pd(t, _mm256_sub_pd(y, one)), y);
    __m256d res = _mm256_add_pd(vlog(y), corr);
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    return _mm256_blendv_pd(res, inf, _mm256_cmp_pd(y, inf, _CMP_EQ_OQ));
}

inline double hsum(__m256d v) {
    alignas(32) double l[4];
    _mm256_store_pd(l, v);
    return (l[0] + l[1]) + (l[2] + l[3]);
}

// Loads up to four values, padding with `fill`.
inline __m256d load_tail(const double* p, std::size_t rem, double fill) {
    alignas(32) double buf[4] = {fill, fill, fill, fill};
    for (std::size_t i = 0; i < rem; ++i) buf[i] = p[i];
    return _mm256_load_pd(buf);
}

}  // namespace

void exp_batch(std::span<const double> in, std::span<double> out) {
    const std::size_t n = in.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out.data() + i, vexp(_mm256_loadu_pd(in.data() + i)));
    if (i < n) {
        alignas(32) double buf[4];
        _mm256_store_pd(buf, vexp(load_tail(in.data() + i, n - i, 0.0)));
        for (std::size_t k = 0; i + k < n; ++k) out[i + k] = buf[k];
    }
}

void log_batch(std::span<const double> in, std::span<double> out) {
    const std::size_t n = in.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out.data() + i, vlog(_mm256_loadu_pd(in.data() + i)));
    if (i < n) {
        alignas(32) double buf[4];
        _mm256_store_pd(buf, vlog(load_tail(in.data() + i, n - i, 1.0)));
        for (std::size_t k = 0; i + k < n; ++k) out[i + k] = buf[k];
    }
}

double sum_log1p_cexp(std::span<const double> L, double c, double beta) {
    const __m256d vb = _mm256_set1_pd(beta);
    const __m256d vc = _mm256_set1_pd(c);
    const double ninf = -std::numeric_limits<double>::infinity();
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n = L.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_mul_pd(vc, vexp(_mm256_mul_pd(vb, _mm256_loadu_pd(L.data() + i))));
        acc = _mm256_add_pd(acc, vlog1p(t));
    }
    if (i < n) {
        const __m256d t = _mm256_mul_pd(vc, vexp(_mm256_mul_pd(vb, load_tail(L.data() + i, n - i, ninf))));
        acc = _mm256_add_pd(acc, vlog1p(t));
    }
    return hsum(acc);
}

PowerSums weighted_power_sums(std::span<const double> L, std::span<const double> w, double beta) {
    const __m256d vb = _mm256_set1_pd(beta);
    const __m256d zero = _mm256_setzero_pd();
    const double ninf = -std::numeric_limits<double>::infinity();
    const bool unit = w.empty();
    __m256d a0 = zero;
    __m256d a1 = zero;
    const std::size_t n = L.size();
    auto step = [&](__m256d l, __m256d wv) {
        const __m256d e = vexp(_mm256_mul_pd(vb, l));
        const __m256d live = _mm256_cmp_pd(e, zero, _CMP_NEQ_OQ);
        const __m256d we = _mm256_and_pd(_mm256_mul_pd(wv, e), live);
        a0 = _mm256_add_pd(a0, we);
        a1 = _mm256_add_pd(a1, _mm256_and_pd(_mm256_mul_pd(we, l), live));
    };
    std::size_t i = 0;
    const __m256d ones = _mm256_set1_pd(1.0);
    for (; i + 4 <= n; i += 4)
        step(_mm256_loadu_pd(L.data() + i), unit ? ones : _mm256_loadu_pd(w.data() + i));
    if (i < n)
        step(load_tail(L.data() + i, n - i, ninf), unit ? ones : load_tail(w.data() + i, n - i, 0.0));
    return {hsum(a0), hsum(a1)};
}

double estep_weights(std::span<const double> L, double c, double alpha, double beta, double a,
                     std::span<double> w_out) {
    const __m256d vb = _mm256_set1_pd(beta);
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vA = _mm256_set1_pd(a);
    const __m256d one = _mm256_set1_pd(1.0);
    const double ninf = -std::numeric_limits<double>::infinity();
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n = L.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_mul_pd(vc, vexp(_mm256_mul_pd(vb, _mm256_loadu_pd(L.data() + i))));
        const __m256d b = _mm256_mul_pd(va, _mm256_add_pd(one, t));
        _mm256_storeu_pd(w_out.data() + i, _mm256_div_pd(vA, b));
        acc = _mm256_add_pd(acc, vlog1p(t));
    }
    if (i < n) {
        const __m256d t = _mm256_mul_pd(vc, vexp(_mm256_mul_pd(vb, load_tail(L.data() + i, n - i, ninf))));
        const __m256d b = _mm256_mul_pd(va, _mm256_add_pd(one, t));
        alignas(32) double buf[4];
        _mm256_store_pd(buf, _mm256_div_pd(vA, b));
        for (std::size_t k = 0; i + k < n; ++k) w_out[i + k] = buf[k];
        acc = _mm256_add_pd(acc, vlog1p(t));  // padded lanes contribute log1p(0) = 0
    }
    return hsum(acc) + static_cast<double>(n) * std::log(alpha);
}

CentralSums central_sums(std::span<const double> x, double center) {
    const __m256d vc = _mm256_set1_pd(center);
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    __m256d s4 = _mm256_setzero_pd();
    const std::size_t n = x.size();
    auto step = [&](__m256d v) {
        const __m256d d = _mm256_sub_pd(v, vc);
        const __m256d d2 = _mm256_mul_pd(d, d);
        s2 = _mm256_add_pd(s2, d2);
        s3 = _mm256_fmadd_pd(d2, d, s3);
        s4 = _mm256_fmadd_pd(d2, d2, s4);
    };
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) step(_mm256_loadu_pd(x.data() + i));
    if (i < n) step(load_tail(x.data() + i, n - i, center));
    return {hsum(s2), hsum(s3), hsum(s4)};
}

LMomentSums lmoment_sums(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    const __m256d vn = _mm256_set1_pd(static_cast<double>(n));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d three = _mm256_set1_pd(3.0);
    __m256d sb = _mm256_setzero_pd();
    __m256d sc = _mm256_setzero_pd();
    __m256d sd = _mm256_setzero_pd();
    __m256d vi = _mm256_set_pd(4.0, 3.0, 2.0, 1.0);
    const __m256d four = _mm256_set1_pd(4.0);
    auto step = [&](__m256d x) {
        const __m256d im1 = _mm256_sub_pd(vi, one);
        const __m256d im2 = _mm256_sub_pd(vi, two);
        const __m256d nmi = _mm256_sub_pd(vn, vi);
        const __m256d nmi1 = _mm256_sub_pd(nmi, one);
        const __m256d bw = _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(two, vi), vn), one);
        __m256d cw = _mm256_mul_pd(im1, im2);
        cw = _mm256_fnmadd_pd(_mm256_mul_pd(four, im1), nmi, cw);
        cw = _mm256_fmadd_pd(nmi, nmi1, cw);
        const __m256d t1 = _mm256_mul_pd(_mm256_mul_pd(im1, im2), _mm256_sub_pd(vi, three));
        const __m256d t2 = _mm256_mul_pd(_mm256_mul_pd(nmi, nmi1), _mm256_sub_pd(nmi, two));
        const __m256d t3 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(9.0),
                                                       _mm256_sub_pd(_mm256_add_pd(vn, one), _mm256_mul_pd(two, vi))),
                                         _mm256_mul_pd(im1, nmi));
        const __m256d dw = _mm256_add_pd(_mm256_sub_pd(t1, t2), t3);
        sb = _mm256_fmadd_pd(bw, x, sb);
        sc = _mm256_fmadd_pd(cw, x, sc);
        sd = _mm256_fmadd_pd(dw, x, sd);
        vi = _mm256_add_pd(vi, four);
    };
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) step(_mm256_loadu_pd(sorted.data() + i));
    if (i < n) step(load_tail(sorted.data() + i, n - i, 0.0));
    return {hsum(sb), hsum(sc), hsum(sd)};
}

}  // namespace skegtd::kernels::avx2

#else

namespace skegtd::kernels::avx2 {

void exp_batch(std::span<const double> in, std::span<double> out) { scalar::exp_batch(in, out); }
void log_batch(std::span<const double> in, std::span<double> out) { scalar::log_batch(in, out); }
double sum_log1p_cexp(std::span<const double> L, double c, double beta) {
    return scalar::sum_log1p_cexp(L, c, beta);
}
PowerSums weighted_power_sums(std::span<const double> L, std::span<const double> w, double beta) {
    return scalar::weighted_power_sums(L, w, beta);
}
double estep_weights(std::span<const double> L, double c, double alpha, double beta, double a,
                     std::span<double> w_out) {
    return scalar::estep_weights(L, c, alpha, beta, a, w_out);
}
CentralSums central_sums(std::span<const double> x, double center) { return scalar::central_sums(x, center); }
LMomentSums lmoment_sums(std::span<const double> sorted) { return scalar::lmoment_sums(sorted); }

}  // namespace skegtd::kernels::avx2

#endif

#include "lpd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define LPD_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define LPD_HAVE_AVX2_BUILD 0
#endif

namespace lpd::kernels {

#if LPD_HAVE_AVX2_BUILD
namespace {

#define LPD_AVX2 __attribute__((target("avx2,fma")))

LPD_AVX2 inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Two complex values per register: lanes (r0, i0, r1, i1).
// conj(a)*b real part = ar*br + ai*bi, imag part = ar*bi - ai*br.
LPD_AVX2 void cdot_avx2(const double* a, const double* b, std::size_t n, double* out_re,
                        double* out_im) {
    __m256d acc_rr = _mm256_setzero_pd();  // accumulates a*b lane-wise
    __m256d acc_x = _mm256_setzero_pd();   // accumulates a*swap(b)
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(a + 2 * i);
        const __m256d vb = _mm256_loadu_pd(b + 2 * i);
        acc_rr = _mm256_fmadd_pd(va, vb, acc_rr);
        acc_x = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), acc_x);
    }
    // acc_rr lanes: ar*br, ai*bi, ... -> real = sum of all lanes
    // acc_x lanes: ar*bi, ai*br, ... -> imag = even lanes - odd lanes
    const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
    double re = hsum(acc_rr);
    double im = hsum(_mm256_mul_pd(acc_x, sign));
    for (; i < n; ++i) {
        const double ar = a[2 * i], ai = a[2 * i + 1];
        const double br = b[2 * i], bi = b[2 * i + 1];
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    *out_re = re;
    *out_im = im;
}

LPD_AVX2 void cdot_row_avx2(const double* x, const double* rows, std::size_t count, std::size_t t,
                              double* out) {
    for (std::size_t j = 0; j < count; ++j) cdot_avx2(x, rows + 2 * t * j, t, out + 2 * j, out + 2 * j + 1);
}

LPD_AVX2 void coherence_row_avx2(const double* x, const double* rows, std::size_t count,
                                 std::size_t t, double* out) {
    for (std::size_t j = 0; j < count; ++j) {
        double re = 0.0, im = 0.0;
        cdot_avx2(x, rows + 2 * t * j, t, &re, &im);
        out[j] = re * re + im * im;
    }
}

LPD_AVX2 double energy_avx2(const double* z, std::size_t n) {
    const std::size_t len = 2 * n;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(z + i);
        const __m256d v1 = _mm256_loadu_pd(z + i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) acc += z[i] * z[i];
    return acc;
}

LPD_AVX2 double sum_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

LPD_AVX2 Moments4 central_moments_avx2(const double* x, std::size_t n, double mean) {
    const __m256d vm = _mm256_set1_pd(mean);
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    __m256d a4 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vm);
        const __m256d d2 = _mm256_mul_pd(d, d);
        a2 = _mm256_add_pd(a2, d2);
        a3 = _mm256_fmadd_pd(d2, d, a3);
        a4 = _mm256_fmadd_pd(d2, d2, a4);
    }
    Moments4 m{hsum(a2), hsum(a3), hsum(a4)};
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    return m;
}

LPD_AVX2 void weighted_sum_avx2(const double* z, const double* w, std::size_t n, double* out_re,
                                double* out_im) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        // (w0, w0, w1, w1)
        const __m128d w2 = _mm_loadu_pd(w + i);
        const __m256d ww = _mm256_permute4x64_pd(_mm256_castpd128_pd256(w2), 0b01010000);
        acc = _mm256_fmadd_pd(ww, _mm256_loadu_pd(z + 2 * i), acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double re = lanes[0] + lanes[2];
    double im = lanes[1] + lanes[3];
    for (; i < n; ++i) {
        re += w[i] * z[2 * i];
        im += w[i] * z[2 * i + 1];
    }
    *out_re = re;
    *out_im = im;
}

LPD_AVX2 void sq_dist_2d_avx2(double qx, double qy, const double* xs, const double* ys,
                              std::size_t n, double* out) {
    const __m256d vx = _mm256_set1_pd(qx);
    const __m256d vy = _mm256_set1_pd(qy);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vy);
        // No FMA here: keeps results bit-identical to the scalar reference.
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        out[i] = dx * dx + dy * dy;
    }
}

#undef LPD_AVX2

}  // namespace

const KernelTable* avx2() {
    static const KernelTable table{
        "avx2",   cdot_avx2, cdot_row_avx2,         coherence_row_avx2, energy_avx2,
        sum_avx2, central_moments_avx2, weighted_sum_avx2,  sq_dist_2d_avx2,
    };
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &table : nullptr;
}

#else

const KernelTable* avx2() { return nullptr; }

#endif

}  // namespace lpd::kernels

#include "lpd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace lpd::kernels {

#if defined(__aarch64__)
namespace {

// One complex value per float64x2_t.
void cdot_neon(const double* a, const double* b, std::size_t n, double* out_re, double* out_im) {
    float64x2_t acc_rr = vdupq_n_f64(0.0);  // (ar*br, ai*bi)
    float64x2_t acc_x = vdupq_n_f64(0.0);   // (ar*bi, ai*br)
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t va = vld1q_f64(a + 2 * i);
        const float64x2_t vb = vld1q_f64(b + 2 * i);
        acc_rr = vfmaq_f64(acc_rr, va, vb);
        acc_x = vfmaq_f64(acc_x, va, vextq_f64(vb, vb, 1));
    }
    *out_re = vgetq_lane_f64(acc_rr, 0) + vgetq_lane_f64(acc_rr, 1);
    *out_im = vgetq_lane_f64(acc_x, 0) - vgetq_lane_f64(acc_x, 1);
}

void cdot_row_neon(const double* x, const double* rows, std::size_t count, std::size_t t,
                     double* out) {
    for (std::size_t j = 0; j < count; ++j) cdot_neon(x, rows + 2 * t * j, t, out + 2 * j, out + 2 * j + 1);
}

void coherence_row_neon(const double* x, const double* rows, std::size_t count, std::size_t t,
                        double* out) {
    for (std::size_t j = 0; j < count; ++j) {
        double re = 0.0, im = 0.0;
        cdot_neon(x, rows + 2 * t * j, t, &re, &im);
        out[j] = re * re + im * im;
    }
}

double energy_neon(const double* z, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t v = vld1q_f64(z + 2 * i);
        acc = vfmaq_f64(acc, v, v);
    }
    return vaddvq_f64(acc);
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

Moments4 central_moments_neon(const double* x, std::size_t n, double mean) {
    const float64x2_t vm = vdupq_n_f64(mean);
    float64x2_t a2 = vdupq_n_f64(0.0), a3 = vdupq_n_f64(0.0), a4 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vm);
        const float64x2_t d2 = vmulq_f64(d, d);
        a2 = vaddq_f64(a2, d2);
        a3 = vfmaq_f64(a3, d2, d);
        a4 = vfmaq_f64(a4, d2, d2);
    }
    Moments4 m{vaddvq_f64(a2), vaddvq_f64(a3), vaddvq_f64(a4)};
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    return m;
}

void weighted_sum_neon(const double* z, const double* w, std::size_t n, double* out_re,
                       double* out_im) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n; ++i) acc = vfmaq_n_f64(acc, vld1q_f64(z + 2 * i), w[i]);
    *out_re = vgetq_lane_f64(acc, 0);
    *out_im = vgetq_lane_f64(acc, 1);
}

void sq_dist_2d_neon(double qx, double qy, const double* xs, const double* ys, std::size_t n,
                     double* out) {
    const float64x2_t vx = vdupq_n_f64(qx);
    const float64x2_t vy = vdupq_n_f64(qy);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vx);
        const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vy);
        vst1q_f64(out + i, vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy)));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        out[i] = dx * dx + dy * dy;
    }
}

}  // namespace

const KernelTable* neon() {
    static const KernelTable table{
        "neon",   cdot_neon, cdot_row_neon,            coherence_row_neon, energy_neon,
        sum_neon, central_moments_neon, weighted_sum_neon,  sq_dist_2d_neon,
    };
    return &table;
}

#else

const KernelTable* neon() { return nullptr; }

#endif

}  // namespace lpd::kernels

#include "lpd/kernels.hpp"

namespace lpd::kernels {
namespace {

void cdot_scalar(const double* a, const double* b, std::size_t n, double* out_re, double* out_im) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[2 * i], ai = a[2 * i + 1];
        const double br = b[2 * i], bi = b[2 * i + 1];
        // conj(a) * b
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    *out_re = re;
    *out_im = im;
}

void cdot_row_scalar(const double* x, const double* rows, std::size_t count, std::size_t t,
                     double* out) {
    for (std::size_t j = 0; j < count; ++j) cdot_scalar(x, rows + 2 * t * j, t, out + 2 * j, out + 2 * j + 1);
}

void coherence_row_scalar(const double* x, const double* rows, std::size_t count, std::size_t t,
                          double* out) {
    for (std::size_t j = 0; j < count; ++j) {
        double re = 0.0, im = 0.0;
        cdot_scalar(x, rows + 2 * t * j, t, &re, &im);
        out[j] = re * re + im * im;
    }
}

double energy_scalar(const double* z, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i) acc += z[i] * z[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

Moments4 central_moments_scalar(const double* x, std::size_t n, double mean) {
    Moments4 m;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    return m;
}

void weighted_sum_scalar(const double* z, const double* w, std::size_t n, double* out_re,
                         double* out_im) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += w[i] * z[2 * i];
        im += w[i] * z[2 * i + 1];
    }
    *out_re = re;
    *out_im = im;
}

void sq_dist_2d_scalar(double qx, double qy, const double* xs, const double* ys, std::size_t n,
                       double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        out[i] = dx * dx + dy * dy;
    }
}

}  // namespace

const KernelTable& scalar() {
    static const KernelTable table{
        "scalar",         cdot_scalar, cdot_row_scalar,         coherence_row_scalar, energy_scalar,
        sum_scalar,       central_moments_scalar, weighted_sum_scalar,  sq_dist_2d_scalar,
    };
    return table;
}

}  // namespace lpd::kernels

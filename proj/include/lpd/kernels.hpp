#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference implementation;
// AVX2 (x86-64) and NEON (aarch64) variants are picked at runtime. Complex data
// is passed as interleaved (re, im) doubles so kernels stay free of templates.

#include <cstddef>
#include <string_view>

namespace lpd::kernels {

struct Moments4 {
    double m2 = 0.0;  // sum (x - mean)^2
    double m3 = 0.0;
    double m4 = 0.0;
};

struct KernelTable {
    std::string_view name;

    // out = a^H b over n complex entries.
    void (*cdot)(const double* a, const double* b, std::size_t n, double* out_re, double* out_im);

    // out[2j], out[2j+1] = x^H rows_j (complex) for `count` rows of length t.
    void (*cdot_row)(const double* x, const double* rows, std::size_t count, std::size_t t,
                     double* out);

    // out[j] = |x^H rows_j|^2 for `count` rows of length t stored contiguously.
    void (*coherence_row)(const double* x, const double* rows, std::size_t count, std::size_t t,
                          double* out);

    // sum_i |z_i|^2
    double (*energy)(const double* z, std::size_t n);

    // sum_i x_i
    double (*sum)(const double* x, std::size_t n);

    // Central moment sums of orders 2..4 about `mean`.
    Moments4 (*central_moments)(const double* x, std::size_t n, double mean);

    // out = sum_i w_i z_i for complex z and real weights w.
    void (*weighted_sum)(const double* z, const double* w, std::size_t n, double* out_re,
                         double* out_im);

    // out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2
    void (*sq_dist_2d)(double qx, double qy, const double* xs, const double* ys, std::size_t n,
                       double* out);
};

const KernelTable& scalar();
// nullptr when the variant is not compiled in or the CPU lacks the extension.
const KernelTable* avx2();
const KernelTable* neon();

// Best supported table. LPD_SIMD=scalar|avx2|neon in the environment overrides
// the choice (falls back to scalar if the requested variant is unavailable).
const KernelTable& active();

}  // namespace lpd::kernels

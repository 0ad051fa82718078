#pragma once

// Constellations of lines in C^T (points on the Grassmannian G(1, C^T)) and
// their max-min chordal distance design.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "lpd/types.hpp"

namespace lpd::grassmann {

inline constexpr double kUnitNormTolerance = 1e-9;

// A unit-norm complex T-vector. Any phase rotation of it spans the same line.
class Codeword {
public:
    // Throws DimensionError for T < 2 and ValidationError if | ||x|| - 1 | > 1e-9.
    explicit Codeword(CVec entries);

    // Normalizes `entries` instead of validating; throws ValidationError on a zero vector.
    static Codeword normalized(CVec entries);

    std::size_t size() const { return entries_.size(); }
    std::span<const cplx> entries() const { return entries_; }
    const cplx& operator[](std::size_t i) const { return entries_[i]; }

private:
    struct Unchecked {};
    Codeword(CVec entries, Unchecked) : entries_(std::move(entries)) {}
    CVec entries_;
};

// K codewords of common length T, stored row-major so kernels can stream them.
class Codebook {
public:
    Codebook(std::size_t t, std::size_t k, CVec rows, std::uint64_t design_seed = 0,
             std::size_t design_iterations = 0);
    static Codebook from_codewords(std::span<const Codeword> words);

    std::size_t T() const { return t_; }
    std::size_t K() const { return k_; }
    std::span<const cplx> row(std::size_t k) const { return {rows_.data() + k * t_, t_}; }
    Codeword codeword(std::size_t k) const;
    const CVec& data() const { return rows_; }

    // Cached at construction; equals min_distance(*this).
    double min_chordal_distance() const { return min_distance_; }
    std::uint64_t design_seed() const { return design_seed_; }
    std::size_t design_iterations() const { return design_iterations_; }
    // log2(K)/T bits per channel use.
    double spectral_efficiency() const;
    unsigned bits_per_codeword() const;

private:
    std::size_t t_ = 0;
    std::size_t k_ = 0;
    CVec rows_;
    double min_distance_ = 0.0;
    std::uint64_t design_seed_ = 0;
    std::size_t design_iterations_ = 0;
};

// sqrt(1 - |a^H b|^2), clamped to [0, 1].
double chordal_distance(std::span<const cplx> a, std::span<const cplx> b);
double chordal_distance(const Codeword& a, const Codeword& b);

// Minimum over all K(K-1)/2 pairs. Throws ValidationError when K < 2.
double min_distance(const Codebook& cb);

struct DesignParams {
    double beta0 = 50.0;          // initial soft-max temperature
    double beta_growth = 2.0;     // multiplier applied every beta_period iterations
    std::size_t beta_period = 200;
    double initial_step = 0.1;
    double min_step = 1e-10;
};

// One record per iteration of the ascent.
struct DesignStep {
    std::size_t iteration = 0;
    double beta = 0.0;
    double objective_before = 0.0;
    double objective_after = 0.0;  // equals objective_before when no step was accepted
    double step = 0.0;             // 0 when the line search failed
    double max_norm_error = 0.0;   // max | ||x_k|| - 1 | after retraction
    double min_distance = 0.0;     // of the current iterate
};

using DesignObserver = std::function<void(const DesignStep&)>;

// Soft-max coherence surrogate: (1/beta) log sum_{i<j} exp(beta |x_i^H x_j|^2).
// Design maximizes its negative.
double coherence_surrogate(std::span<const cplx> rows, std::size_t t, std::size_t k, double beta);

// i.i.d. complex Gaussian rows, normalized. Same draw design_codebook starts from.
Codebook random_codebook(std::size_t t, std::size_t k, std::uint64_t seed);

// Riemannian gradient ascent of the negated surrogate with backtracking line
// search and renormalization retraction. Returns the iterate with the largest
// true minimum distance seen, so the result is never worse than the start.
Codebook design_codebook(std::size_t t, std::size_t k, std::size_t iterations, std::uint64_t seed,
                         const DesignParams& params = {}, const DesignObserver& observer = {});

// Text format: optional '#' comment lines, header "T K", then K rows of 2T
// decimal values (re, im interleaved).
void save_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace lpd::grassmann

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "lpd/types.hpp"

namespace lpd {

// SplitMix64 finalizer; the mixing step used for counter-based stream derivation.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a master seed and a path of counters
// (e.g. {grid_point, scheme, trial}). The result depends only on the inputs, so
// a trial's randomness is fixed no matter which worker runs it.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return uniform_(engine_); }
    double uniform_phase() { return kTwoPi * uniform_(engine_); }
    double normal() { return normal_(engine_); }
    std::uint64_t bits() { return engine_(); }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

    // Circularly-symmetric complex normal with E|z|^2 = variance.
    cplx complex_normal(double variance = 1.0) {
        const double s = std::sqrt(0.5 * variance);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lpd

#pragma once

// k-nearest-neighbour KL divergence estimation between the transmitted sample
// distribution and complex Gaussian noise.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lpd/grassmann.hpp"
#include "lpd/rng.hpp"
#include "lpd/types.hpp"

namespace lpd::divergence {

struct SampleCloud {
    std::size_t dim = 2;
    RVec points;  // row-major, size() == n * dim
    std::string label;

    std::size_t size() const { return dim ? points.size() / dim : 0; }
};

SampleCloud cloud_from_complex(std::span<const cplx> z, std::string label = {});

struct KlEstimate {
    double nats = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    // A zero neighbour distance (duplicate points) was replaced by a tiny
    // floor; the estimate is then dominated by that floor.
    bool jittered = false;
};

// D = (d/n) sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1)).
// 2-d clouds use a uniform grid search; other dimensions use brute force.
KlEstimate kl_knn(const SampleCloud& p, const SampleCloud& q, std::size_t k,
                  std::size_t threads = 0);

// round(sqrt(n)), the default neighbour order.
std::size_t default_k(std::size_t n);

// n per-sample points drawn from ceil(n/T) uniformly chosen codewords,
// optionally rotated by i.i.d. uniform phases, scaled by sqrt(T).
SampleCloud constellation_sample_cloud(const grassmann::Codebook& cb, std::size_t n, bool rotate,
                                       Rng& rng);

// n i.i.d. CN(0, 1) samples as 2-d points.
SampleCloud gaussian_cloud(std::size_t n, Rng& rng);

struct KlRow {
    std::size_t T = 0;
    double eta = 0.0;
    std::size_t K = 0;
    double kl_nats = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

struct KlSweepParams {
    std::vector<std::size_t> T_list{2, 4, 6, 8};
    std::vector<double> eta_list{1.5};
    std::size_t n = 50000;
    std::size_t k = 0;  // 0 selects default_k(n)
    std::uint64_t seed = 1;
    std::size_t design_iterations = 1000;
    // Codebooks with more than large_k codewords get large_k_iterations.
    std::size_t large_k = 1024;
    std::size_t large_k_iterations = 60;
    std::size_t threads = 0;
};

struct KlSweepResult {
    std::vector<KlRow> rows;
    std::vector<std::string> warnings;  // skipped (T, eta) points
};

// Rows follow eta_list-major, T_list-minor order. The codebook for (T, K) is
// designed from derive_seed(seed, {T, K}); the point's samples use
// derive_seed(seed, {T, K, 1}) for the signal and {T, K, 2} for the noise.
KlSweepResult kl_sweep(const KlSweepParams& params);

inline constexpr const char* kKlCsvHeader = "T,eta,K,kl_nats,n,k,seed";
void write_kl_csv(std::ostream& out, const std::vector<KlRow>& rows);

}  // namespace lpd::divergence

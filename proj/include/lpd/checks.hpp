#pragma once

// Pass/fail checks against the reference curves, shared by the CLI --check
// flag and the acceptance binary.

#include <cstdint>
#include <string>
#include <vector>

#include "lpd/config.hpp"
#include "lpd/divergence.hpp"
#include "lpd/experiment.hpp"

namespace lpd::checks {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

// "PASS [id] name: detail"
std::string format(const CheckResult& r);

struct KlTarget {
    std::size_t T;
    double kl;
};
// Reference KL values for eta = 1.5.
const std::vector<KlTarget>& kl_targets();

struct BerTarget {
    const char* series;
    double x;
    double ber;
};
const std::vector<BerTarget>& ber_targets();

// Strictly decreasing in T for eta = 1.5 and within 25% of the targets.
CheckResult check_kl_trend(const std::vector<divergence::KlRow>& rows);
// Each target point within a factor of 2.
CheckResult check_ber_curve(const std::vector<CurvePoint>& points);
// Every noise-only point in [0.035, 0.065].
CheckResult check_pfa(const std::vector<CurvePoint>& points);
// At +4.92 dB: Pd(nc) < Pd(qam64) <= Pd(qpsk), Pd(nc) in [0.45, 0.75],
// Pd(qpsk) in [0.85, 0.98]; every Pd below -15 dB in [0.03, 0.08].
CheckResult check_covertness(const std::vector<CurvePoint>& points);
// Designed T=4, K=64 beats the best of 20 random codebooks (seeds 1..20);
// designed T=2, K=2 reaches 0.999.
CheckResult check_constellation(std::uint64_t design_seed, std::size_t iterations);
// Exact identities: end-to-end noiseless round trip, detector invariance,
// m-sequence autocorrelation, the 4-point Jarque-Bera value, despread(spread).
CheckResult check_exactness(std::uint64_t seed);
// Small ber and detect runs give byte-identical CSVs on 1 and `threads` workers.
CheckResult check_determinism(const ExperimentConfig& base, std::size_t threads);

}  // namespace lpd::checks

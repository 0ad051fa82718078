#pragma once

// Willie: Gaussianity tests on chip-rate samples with empirically calibrated
// thresholds, and an energy-detector baseline.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include "lpd/types.hpp"

namespace lpd::warden {

inline constexpr std::size_t kJarqueBeraMinSamples = 4;
inline constexpr std::size_t kRadiometerMinSamples = 100;

enum class Decision { D0, D1 };

struct DetectionOutcome {
    double statistic = 0.0;
    double threshold = 0.0;
    Decision decision = Decision::D0;  // D1 iff statistic > threshold
    std::string test_name;
    std::size_t sample_count = 0;
};

struct Moments {
    double skewness = 0.0;
    double kurtosis = 0.0;  // not excess: 3 for a Gaussian
};

// Sample skewness and kurtosis from biased central moments.
// Throws ValidationError for fewer than 4 samples or zero variance.
Moments sample_moments(std::span<const double> x);

// (n/6) (S^2 + (K - 3)^2 / 4).
double jarque_bera_statistic(std::span<const double> x);

// Real parts followed by imaginary parts.
RVec complexify(std::span<const cplx> z);

// Extension point for other Gaussianity tests. Larger values mean less Gaussian.
class GaussianityTest {
public:
    virtual ~GaussianityTest() = default;
    virtual std::string name() const = 0;
    virtual double statistic(std::span<const double> x) const = 0;
};

class JarqueBera final : public GaussianityTest {
public:
    std::string name() const override { return "jarque_bera"; }
    double statistic(std::span<const double> x) const override {
        return jarque_bera_statistic(x);
    }
};

std::unique_ptr<GaussianityTest> make_test(const std::string& name);

// Upper 1 - pfa quantile of chi-square with 2 degrees of freedom: -2 ln(pfa).
double jarque_bera_asymptotic_threshold(double pfa);

struct CalibratedThreshold {
    std::string test_name;
    std::size_t sample_count = 0;  // complex samples per window
    double target_pfa = 0.05;
    double threshold = 0.0;
    std::size_t calibration_trials = 0;
    std::uint64_t seed = 0;
};

// Simulates `trials` windows of n i.i.d. CN(0,1) samples (the statistic uses
// sample moments, so the noise level is irrelevant) and returns the
// statistic value exceeded by a fraction target_pfa of them. Trial t draws
// from derive_seed(seed, {t}), so the result does not depend on `threads`.
CalibratedThreshold calibrate_threshold(const GaussianityTest& test, std::size_t n,
                                        double target_pfa, std::size_t trials, std::uint64_t seed,
                                        std::size_t threads = 0);

// Threshold index used by calibrate_threshold: sorted[ceil((1 - pfa) N) - 1].
double empirical_upper_quantile(std::span<double> values, double pfa);

// Energy detector with known noise variance: statistic (1/n) sum |y|^2,
// threshold sigma^2 (1 + z_{1-pfa} / sqrt(n)) from the Gaussian approximation.
DetectionOutcome radiometer(std::span<const cplx> y, double noise_variance, double target_pfa);

// complexify + statistic + comparison. Throws DimensionError when the window
// length differs from the calibrated sample count.
DetectionOutcome detect_frame(std::span<const cplx> rx, const CalibratedThreshold& threshold,
                              const GaussianityTest& test);

// One "key = value" per line. load throws ParseError on a missing or
// malformed field.
void save_threshold(const CalibratedThreshold& t, const std::filesystem::path& path);
CalibratedThreshold load_threshold(const std::filesystem::path& path);

}  // namespace lpd::warden

#pragma once

// Monte Carlo sweeps behind the BER, detection and KL curves, and their CSV
// and plot-script output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lpd/config.hpp"
#include "lpd/divergence.hpp"
#include "lpd/grassmann.hpp"
#include "lpd/modem.hpp"
#include "lpd/warden.hpp"

namespace lpd {

struct CurvePoint {
    std::string series;  // scheme name, or "noise" for the false-alarm series
    std::string metric;  // "ber", "pd" or "pfa"
    double x = 0.0;
    double value = 0.0;
    double ci95_halfwidth = 0.0;  // 1.96 sqrt(p (1 - p) / samples)
    std::uint64_t trials = 0;
    std::uint64_t events = 0;   // bit errors or D1 decisions
    std::uint64_t samples = 0;  // bits or windows behind `value`
};

double ci95_halfwidth(double p, std::uint64_t samples);

// Loads cfg.codebook_path when set, otherwise designs from cfg.design_seed.
grassmann::Codebook experiment_codebook(const ExperimentConfig& cfg);

// Stream seeds used by the sweeps (all derived from cfg.master_seed):
//   ber     {1, point, trial}            channel; shared by every scheme
//           {1, point, trial, 100 + s}   data bits and phases of scheme s
//   detect  {2, point, trial}            Willie's channel and noise; shared
//           {2, point, trial, 100 + s}   data of scheme s
//   noise   {3, point, trial}            noise-only windows
//   calib   {4}                          threshold calibration
// `threads` (0: all hardware threads) never changes the results.
std::vector<CurvePoint> run_ber_curve(const ExperimentConfig& cfg,
                                      const grassmann::Codebook& cb, std::size_t threads = 0);

// Willie's window for one trial: blocks of `scheme` concatenated until
// warden_sample_count chip-rate samples exist, then fading, CFO and noise.
// scheme == nullopt gives the noise-only window.
CVec willie_window(const ExperimentConfig& cfg, const grassmann::Codebook& cb,
                   std::optional<modem::Scheme> scheme, double axis_db, std::uint64_t channel_seed,
                   std::uint64_t data_seed);

// Uses cfg.threshold_path when it names a threshold with the same test,
// window length and target pfa; otherwise calibrates.
warden::CalibratedThreshold experiment_threshold(const ExperimentConfig& cfg,
                                                 std::size_t threads = 0);

// Pd per scheme and point plus the noise-only Pfa series, all against one threshold.
std::vector<CurvePoint> run_detection_curve(const ExperimentConfig& cfg,
                                            const grassmann::Codebook& cb,
                                            const warden::CalibratedThreshold& threshold,
                                            std::size_t threads = 0);

divergence::KlSweepResult run_kl_sweep(const ExperimentConfig& cfg, std::size_t threads = 0);

// Resolved config as '#' comment lines.
std::string config_comment(const ExperimentConfig& cfg);

inline constexpr const char* kCurveCsvHeader = "series,metric,x,value,ci95,trials,events,samples";
void write_curve_csv(std::ostream& out, const ExperimentConfig& cfg,
                     const std::vector<CurvePoint>& points);

// One CSV per (series, metric) named <stem>_<series>_<metric>.csv plus a
// gnuplot script <stem>.gp; BER plots get a log y axis. Returns the paths
// written. Throws Error when nothing can be written.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<CurvePoint>& points,
                                                  const std::filesystem::path& dir,
                                                  const std::string& stem,
                                                  const std::string& header = {});

}  // namespace lpd

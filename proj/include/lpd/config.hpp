#pragma once

// Declarative experiment description. The text form is one "[section]" per
// module and "key = value" lines; unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lpd/channel.hpp"
#include "lpd/grassmann.hpp"
#include "lpd/modem.hpp"
#include "lpd/types.hpp"

namespace lpd {

struct ExperimentConfig {
    // [general]
    std::uint64_t master_seed = 1;
    std::string output_dir = "results";

    // [grassmann]
    std::size_t T = 4;
    std::size_t K = 64;
    std::size_t design_iterations = 1000;
    std::uint64_t design_seed = 7;
    std::string codebook_path;  // load instead of designing when set
    double beta0 = 50.0;
    double beta_growth = 2.0;
    std::size_t beta_period = 200;
    double initial_step = 0.1;

    // [modem]
    unsigned pn_taps = modem::kDefaultPnTaps;
    unsigned pn_state = modem::kDefaultPnState;
    std::size_t samples_per_chip = 1;
    double rolloff = 0.25;
    std::size_t rrc_span_chips = 24;

    // [channel]
    channel::SnrReference snr_reference = channel::SnrReference::FrontEnd;
    double front_end_oversampling = 16.0;
    double willie_snr_offset_db = -3.0;
    double cfo = 1e-5;
    channel::FadingMode willie_fading = channel::FadingMode::PerWindow;
    bool noiseless = false;

    // [ber]
    std::vector<modem::Scheme> ber_schemes{modem::Scheme::Noncoherent, modem::Scheme::Qpsk,
                                           modem::Scheme::Qam64};
    RVec ber_snr_grid_db;
    std::size_t ber_trials = 1000;
    std::size_t blocks_per_trial = 100;

    // [detect]
    std::vector<modem::Scheme> detect_schemes{modem::Scheme::Noncoherent, modem::Scheme::Qpsk,
                                              modem::Scheme::Qam64};
    RVec detect_snr_grid_db;
    std::size_t detect_trials = 1000;
    std::size_t warden_sample_count = 50000;
    double target_pfa = 0.05;
    std::size_t calibration_trials = 4000;
    std::string warden_test = "jarque_bera";
    std::string threshold_path;  // reuse a saved threshold when its key matches

    // [kl]
    std::vector<std::size_t> kl_T{2, 4, 6, 8};
    RVec kl_eta{1.5};
    std::size_t kl_samples = 50000;
    std::size_t kl_k = 0;  // 0: round(sqrt(kl_samples))
    std::size_t kl_design_iterations = 1000;
    std::size_t kl_large_k = 1024;
    std::size_t kl_large_k_iterations = 60;

    bool operator==(const ExperimentConfig&) const = default;

    channel::LinkBudget link_budget() const;
    modem::PulseShape pulse() const;
    grassmann::DesignParams design_params() const;
};

// "desk" (1000 trials per point) or "paper" (4000). Both carry the reference
// SNR grids. Throws ConfigError for other names.
ExperimentConfig preset(const std::string& name);

// Applies the key/value text on top of `base`. Throws ConfigError naming the
// offending "section.key" and line.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

// Every field, in a form parse_config reads back to an equal config.
std::string to_string(const ExperimentConfig& cfg);

// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& cfg);

}  // namespace lpd

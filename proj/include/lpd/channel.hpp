#pragma once

// Rayleigh block fading, AWGN and carrier frequency offset, plus the link
// budget that maps the swept SNR axis onto Bob's and Willie's noise levels.

#include <optional>
#include <string_view>
#include <vector>

#include "lpd/modem.hpp"
#include "lpd/rng.hpp"
#include "lpd/types.hpp"

namespace lpd::channel {

struct ChannelState {
    cplx h{1.0, 0.0};
    double noise_variance = 0.0;  // per complex sample
    double cfo = 0.0;             // cycles per sample
    std::size_t delay_chips = 0;
};

enum class FadingMode {
    PerBlock,   // independent h per coherence block
    PerWindow,  // one h for the whole stream
};

std::string_view fading_mode_name(FadingMode m);
FadingMode parse_fading_mode(std::string_view name);  // "block" | "window"

struct FadingResult {
    modem::ChipStream rx;
    std::vector<ChannelState> states;  // one per block (one entry for PerWindow)
};

// y = h_b x + n inside block b. Samples past the last whole block (filter
// tails) take the last block's coefficient. `fixed_h` replaces the Rayleigh
// draws, which is how noiseless and unit-gain tests pin the channel.
FadingResult apply_block_fading(const modem::ChipStream& tx, Rng& rng, double noise_variance,
                                FadingMode mode = FadingMode::PerBlock,
                                std::optional<cplx> fixed_h = std::nullopt);

// Sample n is multiplied by exp(j (2 pi eps n + phase0)).
void apply_cfo(std::span<cplx> x, double eps, double phase0 = 0.0);
modem::ChipStream apply_cfo(const modem::ChipStream& x, double eps, double phase0 = 0.0);

void add_awgn(std::span<cplx> x, double variance, Rng& rng);

// Chip noise variance giving the requested post-despreading symbol SNR for
// unit symbol power and E|h|^2 = 1. Despreading is unitary, so this is also
// the symbol-domain noise variance.
double chip_noise_variance(double symbol_snr_db);

enum class SnrReference {
    Symbol,    // the axis is Bob's post-despreading symbol SNR
    FrontEnd,  // the axis is the per-sample SNR in the receiver front-end bandwidth
};

std::string_view snr_reference_name(SnrReference r);
SnrReference parse_snr_reference(std::string_view name);  // "symbol" | "front_end"

struct LinkBudget {
    SnrReference reference = SnrReference::FrontEnd;
    // Front-end sampling rate over chip rate; Bob's matched filter recovers this factor.
    double front_end_oversampling = 16.0;
    // Willie's chip-rate SNR relative to the axis.
    double willie_offset_db = -3.0;

    // Gain from the axis to Bob's symbol SNR: 0 for Symbol,
    // 10 log10(31 * oversampling) for FrontEnd.
    double bob_gain_db() const;
    double bob_symbol_snr_db(double axis_db) const { return axis_db + bob_gain_db(); }
    // Symbol reference: chip SNR = axis - 10 log10(31) + offset.
    double willie_chip_snr_db(double axis_db) const;

    double bob_noise_variance(double axis_db) const;
    // Willie's per-chip noise variance for unit symbol power (chip power 1/31).
    double willie_noise_variance(double axis_db) const;
};

}  // namespace lpd::channel

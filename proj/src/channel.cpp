#include "lpd/channel.hpp"

#include <cmath>
#include <string>

#include "lpd/error.hpp"

namespace lpd::channel {

std::string_view fading_mode_name(FadingMode m) {
    return m == FadingMode::PerBlock ? "block" : "window";
}

FadingMode parse_fading_mode(std::string_view name) {
    if (name == "block") return FadingMode::PerBlock;
    if (name == "window") return FadingMode::PerWindow;
    throw ConfigError("unknown fading mode '" + std::string(name) + "' (expected block or window)");
}

FadingResult apply_block_fading(const modem::ChipStream& tx, Rng& rng, double noise_variance,
                                FadingMode mode, std::optional<cplx> fixed_h) {
    if (noise_variance < 0.0) throw ValidationError("noise variance must be nonnegative");
    FadingResult out;
    out.rx = tx;
    const std::size_t per_block = tx.samples_per_block();
    const std::size_t nblocks =
        mode == FadingMode::PerWindow ? 1 : std::max<std::size_t>(tx.block_count, 1);
    out.states.reserve(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        ChannelState s;
        s.h = fixed_h ? *fixed_h : rng.complex_normal(1.0);
        s.noise_variance = noise_variance;
        out.states.push_back(s);
    }
    auto& y = out.rx.samples;
    for (std::size_t n = 0; n < y.size(); ++n) {
        std::size_t b = 0;
        if (mode == FadingMode::PerBlock && per_block > 0) {
            const std::size_t pos = n >= tx.delay ? n - tx.delay : 0;
            b = std::min(pos / per_block, nblocks - 1);
        }
        y[n] *= out.states[b].h;
    }
    if (noise_variance > 0.0) add_awgn(y, noise_variance, rng);
    return out;
}

void apply_cfo(std::span<cplx> x, double eps, double phase0) {
    if (eps == 0.0 && phase0 == 0.0) return;
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] *= std::polar(1.0, kTwoPi * eps * static_cast<double>(n) + phase0);
}

modem::ChipStream apply_cfo(const modem::ChipStream& x, double eps, double phase0) {
    modem::ChipStream out = x;
    apply_cfo(out.samples, eps, phase0);
    return out;
}

void add_awgn(std::span<cplx> x, double variance, Rng& rng) {
    for (auto& v : x) v += rng.complex_normal(variance);
}

double chip_noise_variance(double symbol_snr_db) { return 1.0 / db_to_linear(symbol_snr_db); }

std::string_view snr_reference_name(SnrReference r) {
    return r == SnrReference::Symbol ? "symbol" : "front_end";
}

SnrReference parse_snr_reference(std::string_view name) {
    if (name == "symbol") return SnrReference::Symbol;
    if (name == "front_end") return SnrReference::FrontEnd;
    throw ConfigError("unknown snr reference '" + std::string(name) +
                      "' (expected symbol or front_end)");
}

double LinkBudget::bob_gain_db() const {
    if (reference == SnrReference::Symbol) return 0.0;
    return linear_to_db(static_cast<double>(modem::kChipsPerSymbol) * front_end_oversampling);
}

double LinkBudget::willie_chip_snr_db(double axis_db) const {
    if (reference == SnrReference::Symbol)
        return axis_db - linear_to_db(static_cast<double>(modem::kChipsPerSymbol)) +
               willie_offset_db;
    return axis_db + willie_offset_db;
}

double LinkBudget::bob_noise_variance(double axis_db) const {
    return chip_noise_variance(bob_symbol_snr_db(axis_db));
}

double LinkBudget::willie_noise_variance(double axis_db) const {
    const double chip_power = 1.0 / static_cast<double>(modem::kChipsPerSymbol);
    return chip_power / db_to_linear(willie_chip_snr_db(axis_db));
}

}  // namespace lpd::channel

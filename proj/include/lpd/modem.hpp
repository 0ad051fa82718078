#pragma once

// Transmit and receive chain around the codebook: bit mapping, phase
// rotation, DSSS spreading with a 31-chip m-sequence, pulse shaping and PN
// timing acquisition.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpd/grassmann.hpp"
#include "lpd/types.hpp"

namespace lpd::modem {

inline constexpr std::size_t kChipsPerSymbol = 31;
// x^5 + x^2 + 1; bit i is the coefficient of x^i below the leading term.
inline constexpr unsigned kDefaultPnTaps = 0b00101;
inline constexpr unsigned kDefaultPnState = 0b00001;

struct PnSequence {
    std::vector<double> chips;  // +1 / -1
    unsigned generator_taps = 0;
    unsigned initial_state = 0;
};

// Fibonacci LFSR of degree 5: a[n+5] = sum over set tap bits i of a[n+i] (mod 2),
// with a[0..4] taken from the bits of initial_state. Chip = 1 - 2 a[n].
// Throws ValidationError for a zero state or taps whose period is not 31.
PnSequence generate_pn(unsigned taps = kDefaultPnTaps, unsigned initial_state = kDefaultPnState);

// Periodic autocorrelation of the chips at `lag`, divided by the length.
double pn_autocorrelation(const PnSequence& pn, std::size_t lag);

// Natural binary labels, most significant bit first.
std::size_t bits_to_index(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> index_to_bits(std::size_t index, unsigned nbits);

// Throws DimensionError if bits.size() != log2(K).
grassmann::Codeword map_bits(std::span<const std::uint8_t> bits, const grassmann::Codebook& cb);
std::vector<std::uint8_t> demap(std::size_t index, const grassmann::Codebook& cb);

grassmann::Codeword rotate(const grassmann::Codeword& x, double theta);

struct ChipStream {
    CVec samples;
    std::size_t samples_per_chip = 1;
    std::size_t chips_per_symbol = kChipsPerSymbol;
    std::size_t symbols_per_block = 1;
    std::size_t block_count = 0;
    // Samples before the first chip peak (filter group delay when oversampled).
    std::size_t delay = 0;

    std::size_t samples_per_block() const {
        return symbols_per_block * chips_per_symbol * samples_per_chip;
    }
};

// chip[31 i + m] = s_i p_m / sqrt(31). symbols.size() must be a multiple of
// symbols_per_block (DimensionError otherwise).
ChipStream spread(std::span<const cplx> symbols, const PnSequence& pn,
                  std::size_t symbols_per_block = 1);

// s_i = (1/sqrt(31)) sum_m c[31 i + m] p_m on a timing-aligned chip-rate
// stream. An oversampled stream is read at the first sample of every chip.
// Throws DimensionError when the length is not a whole number of symbols.
CVec despread(const ChipStream& chips, const PnSequence& pn);

// Unit-energy root-raised-cosine taps spanning `span_chips` chips.
RVec rrc_taps(std::size_t samples_per_chip, double rolloff, std::size_t span_chips);

struct PulseShape {
    std::size_t samples_per_chip = 1;
    double rolloff = 0.25;
    std::size_t span_chips = 24;  // 10 chips leaves ~7e-3 inter-chip interference
};

// samples_per_chip == 1 returns the input unchanged. Otherwise the chips are
// upsampled and filtered with the RRC taps; `delay` records the group delay.
ChipStream pulse_shape(const ChipStream& chips, const PulseShape& shape);

// Filters with the same RRC taps and decimates at the chip peaks, returning a
// chip-rate stream with the original block geometry.
ChipStream matched_filter(const ChipStream& stream, const PulseShape& shape);

struct TimingEstimate {
    std::size_t delay_chips = 0;
    double peak = 0.0;
    double runner_up = 0.0;
    bool low_confidence = false;  // runner_up within 1% of peak
};

// Searches integer chip lags 0..30 for the largest mean PN-correlation
// magnitude over whole symbols. Needs a chip-rate stream with at least two
// whole symbols after the largest lag (DimensionError otherwise).
TimingEstimate acquire_timing(std::span<const cplx> rx, const PnSequence& pn);

enum class Scheme { Noncoherent, Qpsk, Qam64 };

std::string_view scheme_name(Scheme s);
// Accepts "nc", "qpsk", "qam64" (and the long names); throws ConfigError.
Scheme parse_scheme(std::string_view name);

struct FrameSpec {
    Scheme scheme = Scheme::Noncoherent;
    std::size_t T = 4;
    std::vector<std::size_t> pilot_positions;
    CVec pilot_symbols;

    std::size_t data_symbols() const { return T - pilot_positions.size(); }
    // Bits carried by one coherence block.
    unsigned bits_per_block(const grassmann::Codebook* cb) const;
};

// Pilots occupy the leading slots: QPSK uses pilot 1 followed by T-1 data
// symbols; 64-QAM uses pilots (1, j, -1) followed by T-3 data symbols.
FrameSpec make_frame_spec(Scheme scheme, std::size_t T);

}  // namespace lpd::modem

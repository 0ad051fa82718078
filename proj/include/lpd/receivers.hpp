#pragma once

// Bob's side: noncoherent ML detection over the codebook, pilot-based LS
// channel estimation with LMMSE equalization for the coherent baselines,
// Gray QPSK / 64-QAM constellations and bit-error accounting.

#include <cstdint>
#include <span>
#include <vector>

#include "lpd/grassmann.hpp"
#include "lpd/modem.hpp"
#include "lpd/rng.hpp"
#include "lpd/types.hpp"

namespace lpd::receivers {

// argmax_k |y^H x_k|^2. Exact ties go to the lowest index.
std::size_t noncoherent_ml_detect(std::span<const cplx> y, const grassmann::Codebook& cb);

// (sum p* y) / (sum |p|^2). Throws ValidationError if every pilot is zero.
cplx estimate_channel_ls(std::span<const cplx> pilot_obs, std::span<const cplx> pilots);

struct Equalized {
    cplx value{};
    bool degenerate = false;  // h_hat == 0 with zero noise
};

// h_hat* y / (|h_hat|^2 + noise_variance / symbol_power).
Equalized lmmse_equalize(cplx y, cplx h_hat, double noise_variance, double symbol_power = 1.0);

// QPSK: bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
cplx qpsk_mod(std::span<const std::uint8_t> bits);
void qpsk_demod(cplx s, std::span<std::uint8_t> bits_out);

// 64-QAM: three Gray-coded bits per axis on levels {-7,...,7} / sqrt(42);
// bits 0-2 select the in-phase level, bits 3-5 the quadrature level.
cplx qam64_mod(std::span<const std::uint8_t> bits);
void qam64_demod(cplx s, std::span<std::uint8_t> bits_out);

struct BerRecord {
    std::uint64_t bits_sent = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t blocks = 0;

    BerRecord& operator+=(const BerRecord& o) {
        bits_sent += o.bits_sent;
        bit_errors += o.bit_errors;
        blocks += o.blocks;
        return *this;
    }
    double ber() const {
        return bits_sent ? static_cast<double>(bit_errors) / static_cast<double>(bits_sent) : 0.0;
    }
    bool operator==(const BerRecord&) const = default;
};

inline BerRecord operator+(BerRecord a, const BerRecord& b) { return a += b; }

struct TxBlock {
    CVec symbols;                     // T unit-average-power symbols
    std::vector<std::uint8_t> bits;   // bits carried by the block
    std::size_t codeword_index = 0;   // noncoherent only
};

// Draws the block's bits (and, for the noncoherent scheme, its random phase)
// from `rng`. Noncoherent blocks are sqrt(T) x_k e^{j theta}.
TxBlock build_block(const modem::FrameSpec& frame, const grassmann::Codebook* cb, Rng& rng);

// Decodes one block of T despread symbols. noise_variance is the genie value
// used by the LMMSE equalizer.
std::vector<std::uint8_t> decode_block(const modem::FrameSpec& frame,
                                       const grassmann::Codebook* cb, std::span<const cplx> y,
                                       double noise_variance);

struct BlockChannel {
    cplx h{1.0, 0.0};
    double noise_variance = 0.0;  // per chip sample
};

// One coherence block through spread -> (pulse shape) -> h -> AWGN ->
// (matched filter) -> despread -> detect. Data bits and phase come from
// data_rng; chip noise from noise_rng.
BerRecord run_block(const modem::FrameSpec& frame, const grassmann::Codebook* cb,
                    const modem::PnSequence& pn, const BlockChannel& channel, Rng& data_rng,
                    Rng& noise_rng, const modem::PulseShape& shape = {});

}  // namespace lpd::receivers

#include "lpd/receivers.hpp"

#include <algorithm>
#include <cmath>

#include "lpd/channel.hpp"
#include "lpd/error.hpp"
#include "lpd/kernels.hpp"

namespace lpd::receivers {
namespace {

const double kQpskScale = 1.0 / std::sqrt(2.0);
const double kQamScale = 1.0 / std::sqrt(42.0);

unsigned gray(unsigned l) { return l ^ (l >> 1); }

unsigned gray_inverse(unsigned g) {
    unsigned l = g;
    for (unsigned s = g >> 1; s; s >>= 1) l ^= s;
    return l;
}

double qam_level(std::span<const std::uint8_t> b) {
    const unsigned g = (b[0] & 1u) << 2 | (b[1] & 1u) << 1 | (b[2] & 1u);
    return (2.0 * gray_inverse(g) - 7.0) * kQamScale;
}

void qam_axis_demod(double a, std::span<std::uint8_t> out) {
    const double l = std::clamp(std::round((a / kQamScale + 7.0) / 2.0), 0.0, 7.0);
    const unsigned g = gray(static_cast<unsigned>(l));
    out[0] = (g >> 2) & 1u;
    out[1] = (g >> 1) & 1u;
    out[2] = g & 1u;
}

}  // namespace

std::size_t noncoherent_ml_detect(std::span<const cplx> y, const grassmann::Codebook& cb) {
    if (y.size() != cb.T())
        throw DimensionError("noncoherent_ml_detect: observation length " +
                             std::to_string(y.size()) + " != T = " + std::to_string(cb.T()));
    thread_local std::vector<double> metric;
    metric.resize(cb.K());
    kernels::active().coherence_row(reinterpret_cast<const double*>(y.data()),
                                    reinterpret_cast<const double*>(cb.data().data()), cb.K(),
                                    cb.T(), metric.data());
    std::size_t best = 0;
    for (std::size_t k = 1; k < cb.K(); ++k)
        if (metric[k] > metric[best]) best = k;
    return best;
}

cplx estimate_channel_ls(std::span<const cplx> pilot_obs, std::span<const cplx> pilots) {
    if (pilot_obs.size() != pilots.size() || pilots.empty())
        throw DimensionError("estimate_channel_ls: need matching, nonempty pilot lists");
    cplx num{};
    double den = 0.0;
    for (std::size_t i = 0; i < pilots.size(); ++i) {
        num += std::conj(pilots[i]) * pilot_obs[i];
        den += std::norm(pilots[i]);
    }
    if (den == 0.0) throw ValidationError("estimate_channel_ls: all pilots are zero");
    return num / den;
}

Equalized lmmse_equalize(cplx y, cplx h_hat, double noise_variance, double symbol_power) {
    if (noise_variance < 0.0) throw ValidationError("noise variance must be nonnegative");
    const double den = std::norm(h_hat) + noise_variance / symbol_power;
    if (den == 0.0) return {cplx{}, true};
    return {std::conj(h_hat) * y / den, false};
}

cplx qpsk_mod(std::span<const std::uint8_t> bits) {
    if (bits.size() != 2) throw DimensionError("qpsk_mod expects 2 bits");
    return {(1.0 - 2.0 * (bits[0] & 1u)) * kQpskScale, (1.0 - 2.0 * (bits[1] & 1u)) * kQpskScale};
}

void qpsk_demod(cplx s, std::span<std::uint8_t> bits_out) {
    if (bits_out.size() != 2) throw DimensionError("qpsk_demod writes 2 bits");
    bits_out[0] = s.real() < 0.0;
    bits_out[1] = s.imag() < 0.0;
}

cplx qam64_mod(std::span<const std::uint8_t> bits) {
    if (bits.size() != 6) throw DimensionError("qam64_mod expects 6 bits");
    return {qam_level(bits.subspan(0, 3)), qam_level(bits.subspan(3, 3))};
}

void qam64_demod(cplx s, std::span<std::uint8_t> bits_out) {
    if (bits_out.size() != 6) throw DimensionError("qam64_demod writes 6 bits");
    qam_axis_demod(s.real(), bits_out.subspan(0, 3));
    qam_axis_demod(s.imag(), bits_out.subspan(3, 3));
}

TxBlock build_block(const modem::FrameSpec& frame, const grassmann::Codebook* cb, Rng& rng) {
    TxBlock blk;
    const unsigned nbits = frame.bits_per_block(cb);
    blk.bits.resize(nbits);
    for (auto& b : blk.bits) b = static_cast<std::uint8_t>(rng.bits() >> 63);
    blk.symbols.assign(frame.T, cplx{});
    switch (frame.scheme) {
        case modem::Scheme::Noncoherent: {
            if (cb->T() != frame.T) throw DimensionError("codebook T does not match the frame");
            blk.codeword_index = modem::bits_to_index(blk.bits);
            const cplx r = std::polar(std::sqrt(static_cast<double>(frame.T)), rng.uniform_phase());
            const auto row = cb->row(blk.codeword_index);
            for (std::size_t t = 0; t < frame.T; ++t) blk.symbols[t] = row[t] * r;
            break;
        }
        case modem::Scheme::Qpsk:
        case modem::Scheme::Qam64: {
            const bool qpsk = frame.scheme == modem::Scheme::Qpsk;
            const std::size_t per = qpsk ? 2 : 6;
            for (std::size_t i = 0; i < frame.pilot_positions.size(); ++i)
                blk.symbols[frame.pilot_positions[i]] = frame.pilot_symbols[i];
            std::size_t slot = frame.pilot_positions.size();
            for (std::size_t d = 0; d < frame.data_symbols(); ++d, ++slot) {
                std::span<const std::uint8_t> b{blk.bits.data() + d * per, per};
                blk.symbols[slot] = qpsk ? qpsk_mod(b) : qam64_mod(b);
            }
            break;
        }
    }
    return blk;
}

std::vector<std::uint8_t> decode_block(const modem::FrameSpec& frame,
                                       const grassmann::Codebook* cb, std::span<const cplx> y,
                                       double noise_variance) {
    if (y.size() != frame.T) throw DimensionError("decode_block: expected T symbols");
    if (frame.scheme == modem::Scheme::Noncoherent) {
        const std::size_t k = noncoherent_ml_detect(y, *cb);
        return modem::index_to_bits(k, cb->bits_per_codeword());
    }
    const bool qpsk = frame.scheme == modem::Scheme::Qpsk;
    const std::size_t per = qpsk ? 2 : 6;
    const std::size_t np = frame.pilot_positions.size();
    CVec obs(np);
    for (std::size_t i = 0; i < np; ++i) obs[i] = y[frame.pilot_positions[i]];
    const cplx h_hat = estimate_channel_ls(obs, frame.pilot_symbols);
    std::vector<std::uint8_t> bits(per * frame.data_symbols());
    for (std::size_t d = 0; d < frame.data_symbols(); ++d) {
        const cplx s = lmmse_equalize(y[np + d], h_hat, noise_variance).value;
        std::span<std::uint8_t> out{bits.data() + d * per, per};
        if (qpsk)
            qpsk_demod(s, out);
        else
            qam64_demod(s, out);
    }
    return bits;
}

BerRecord run_block(const modem::FrameSpec& frame, const grassmann::Codebook* cb,
                    const modem::PnSequence& pn, const BlockChannel& channel, Rng& data_rng,
                    Rng& noise_rng, const modem::PulseShape& shape) {
    const TxBlock tx = build_block(frame, cb, data_rng);
    modem::ChipStream s = modem::pulse_shape(modem::spread(tx.symbols, pn, frame.T), shape);
    for (auto& v : s.samples) v *= channel.h;
    if (channel.noise_variance > 0.0)
        channel::add_awgn(s.samples, channel.noise_variance, noise_rng);
    const CVec y = modem::despread(modem::matched_filter(s, shape), pn);
    const auto bits = decode_block(frame, cb, y, channel.noise_variance);
    BerRecord rec;
    rec.blocks = 1;
    rec.bits_sent = tx.bits.size();
    for (std::size_t i = 0; i < bits.size(); ++i) rec.bit_errors += bits[i] != tx.bits[i];
    return rec;
}

}  // namespace lpd::receivers

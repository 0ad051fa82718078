#include "lpd/modem.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "lpd/error.hpp"

namespace lpd::modem {
namespace {

constexpr unsigned kPnDegree = 5;
constexpr unsigned kPnMask = (1u << kPnDegree) - 1;

}  // namespace

PnSequence generate_pn(unsigned taps, unsigned initial_state) {
    if ((initial_state & kPnMask) == 0 || initial_state > kPnMask)
        throw ValidationError("PN initial state must be a nonzero 5-bit value");
    if (taps > kPnMask || (taps & 1u) == 0)
        throw ValidationError("PN taps must be a 5-bit mask with the constant term set");
    PnSequence pn;
    pn.generator_taps = taps;
    pn.initial_state = initial_state;
    unsigned state = initial_state;  // bit i holds a[n + i]
    std::size_t period = 0;
    for (std::size_t n = 0; n < kChipsPerSymbol; ++n) {
        const unsigned out = state & 1u;
        pn.chips.push_back(out ? -1.0 : 1.0);
        const unsigned feedback = std::popcount(state & taps) & 1u;
        state = (state >> 1) | (feedback << (kPnDegree - 1));
        if (period == 0 && state == initial_state) period = n + 1;
    }
    if (period != kChipsPerSymbol)
        throw ValidationError("PN taps " + std::to_string(taps) +
                              " are not primitive: period " + std::to_string(period) +
                              " instead of 31");
    return pn;
}

double pn_autocorrelation(const PnSequence& pn, std::size_t lag) {
    const std::size_t n = pn.chips.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += pn.chips[i] * pn.chips[(i + lag) % n];
    return acc / static_cast<double>(n);
}

std::size_t bits_to_index(std::span<const std::uint8_t> bits) {
    std::size_t index = 0;
    for (auto b : bits) index = (index << 1) | (b & 1u);
    return index;
}

std::vector<std::uint8_t> index_to_bits(std::size_t index, unsigned nbits) {
    std::vector<std::uint8_t> bits(nbits);
    for (unsigned i = 0; i < nbits; ++i) bits[nbits - 1 - i] = (index >> i) & 1u;
    return bits;
}

grassmann::Codeword map_bits(std::span<const std::uint8_t> bits, const grassmann::Codebook& cb) {
    const unsigned nbits = cb.bits_per_codeword();
    if (bits.size() != nbits)
        throw DimensionError("map_bits: expected " + std::to_string(nbits) + " bits, got " +
                             std::to_string(bits.size()));
    return cb.codeword(bits_to_index(bits));
}

std::vector<std::uint8_t> demap(std::size_t index, const grassmann::Codebook& cb) {
    if (index >= cb.K()) throw DimensionError("demap: index out of range");
    return index_to_bits(index, cb.bits_per_codeword());
}

grassmann::Codeword rotate(const grassmann::Codeword& x, double theta) {
    const cplx r = std::polar(1.0, theta);
    CVec out(x.entries().begin(), x.entries().end());
    for (auto& v : out) v *= r;
    return grassmann::Codeword(std::move(out));
}

ChipStream spread(std::span<const cplx> symbols, const PnSequence& pn,
                  std::size_t symbols_per_block) {
    if (symbols_per_block == 0 || symbols.size() % symbols_per_block != 0)
        throw DimensionError("spread: symbol count is not a whole number of blocks");
    const double scale = 1.0 / std::sqrt(static_cast<double>(kChipsPerSymbol));
    ChipStream out;
    out.symbols_per_block = symbols_per_block;
    out.block_count = symbols.size() / symbols_per_block;
    out.samples.resize(symbols.size() * kChipsPerSymbol);
    cplx* dst = out.samples.data();
    for (const cplx s : symbols) {
        const cplx a = s * scale;
        for (std::size_t m = 0; m < kChipsPerSymbol; ++m) *dst++ = a * pn.chips[m];
    }
    return out;
}

CVec despread(const ChipStream& chips, const PnSequence& pn) {
    const std::size_t spc = chips.samples_per_chip;
    const std::size_t per_symbol = kChipsPerSymbol * spc;
    const std::size_t body = chips.samples.size() - std::min(chips.samples.size(), chips.delay);
    if (spc == 0 || body % per_symbol != 0)
        throw DimensionError("despread: " + std::to_string(body) +
                             " samples is not a whole number of " + std::to_string(per_symbol) +
                             "-sample symbols");
    const double scale = 1.0 / std::sqrt(static_cast<double>(kChipsPerSymbol));
    CVec out(body / per_symbol);
    const cplx* src = chips.samples.data() + chips.delay;
    for (auto& s : out) {
        cplx acc{};
        for (std::size_t m = 0; m < kChipsPerSymbol; ++m) acc += src[m * spc] * pn.chips[m];
        s = acc * scale;
        src += per_symbol;
    }
    return out;
}

RVec rrc_taps(std::size_t samples_per_chip, double rolloff, std::size_t span_chips) {
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ValidationError("rolloff must be in [0, 1]");
    if (samples_per_chip == 0 || span_chips == 0)
        throw ValidationError("RRC needs samples_per_chip >= 1 and span_chips >= 1");
    const std::size_t n = span_chips * samples_per_chip + 1;
    const double mid = static_cast<double>(n - 1) / 2.0;
    const double b = rolloff;
    RVec h(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) - mid) / static_cast<double>(samples_per_chip);
        double v;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - b + 4.0 * b / kPi;
        } else if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-12) {
            v = b / std::sqrt(2.0) *
                ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) +
                 (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
        } else {
            v = (std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b))) /
                (kPi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t)));
        }
        h[i] = v;
    }
    double energy = 0.0;
    for (double v : h) energy += v * v;
    const double norm = 1.0 / std::sqrt(energy);
    for (double& v : h) v *= norm;
    return h;
}

ChipStream pulse_shape(const ChipStream& chips, const PulseShape& shape) {
    if (!(shape.rolloff >= 0.0 && shape.rolloff <= 1.0))
        throw ValidationError("rolloff must be in [0, 1]");
    if (shape.samples_per_chip == 0) throw ValidationError("samples_per_chip must be >= 1");
    if (shape.samples_per_chip == 1) return chips;
    if (chips.samples_per_chip != 1) throw DimensionError("pulse_shape expects a chip-rate stream");
    const std::size_t spc = shape.samples_per_chip;
    const RVec h = rrc_taps(spc, shape.rolloff, shape.span_chips);
    const std::size_t nchips = chips.samples.size();
    ChipStream out = chips;
    out.samples_per_chip = spc;
    out.delay = (h.size() - 1) / 2;
    out.samples.assign(nchips * spc + h.size() - 1, cplx{});
    for (std::size_t c = 0; c < nchips; ++c) {
        const cplx v = chips.samples[c];
        cplx* dst = out.samples.data() + c * spc;
        for (std::size_t i = 0; i < h.size(); ++i) dst[i] += v * h[i];
    }
    return out;
}

ChipStream matched_filter(const ChipStream& stream, const PulseShape& shape) {
    if (shape.samples_per_chip == 1 && stream.samples_per_chip == 1) return stream;
    if (stream.samples_per_chip != shape.samples_per_chip)
        throw DimensionError("matched_filter: stream and filter oversampling differ");
    const std::size_t spc = shape.samples_per_chip;
    const RVec h = rrc_taps(spc, shape.rolloff, shape.span_chips);
    const std::size_t half = (h.size() - 1) / 2;
    const std::size_t nchips =
        stream.block_count * stream.symbols_per_block * stream.chips_per_symbol;
    ChipStream out;
    out.samples_per_chip = 1;
    out.chips_per_symbol = stream.chips_per_symbol;
    out.symbols_per_block = stream.symbols_per_block;
    out.block_count = stream.block_count;
    out.samples.resize(nchips);
    const auto len = static_cast<std::ptrdiff_t>(stream.samples.size());
    for (std::size_t c = 0; c < nchips; ++c) {
        const auto peak = static_cast<std::ptrdiff_t>(stream.delay + half + c * spc);
        cplx acc{};
        for (std::size_t i = 0; i < h.size(); ++i) {
            const std::ptrdiff_t idx = peak - static_cast<std::ptrdiff_t>(i);
            if (idx >= 0 && idx < len) acc += stream.samples[static_cast<std::size_t>(idx)] * h[i];
        }
        out.samples[c] = acc;
    }
    return out;
}

TimingEstimate acquire_timing(std::span<const cplx> rx, const PnSequence& pn) {
    const std::size_t max_lag = kChipsPerSymbol - 1;
    if (rx.size() < max_lag + 2 * kChipsPerSymbol)
        throw DimensionError("acquire_timing needs at least two whole symbols after every lag");
    const std::size_t nsym = (rx.size() - max_lag) / kChipsPerSymbol;
    std::vector<double> metric(kChipsPerSymbol, 0.0);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t s = 0; s < nsym; ++s) {
            const cplx* p = rx.data() + lag + s * kChipsPerSymbol;
            cplx c{};
            for (std::size_t m = 0; m < kChipsPerSymbol; ++m) c += p[m] * pn.chips[m];
            acc += std::abs(c);
        }
        metric[lag] = acc / static_cast<double>(nsym);
    }
    TimingEstimate est;
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        if (metric[lag] > est.peak) {
            est.runner_up = est.peak;
            est.peak = metric[lag];
            est.delay_chips = lag;
        } else if (metric[lag] > est.runner_up) {
            est.runner_up = metric[lag];
        }
    }
    est.low_confidence = est.runner_up >= 0.99 * est.peak;
    return est;
}

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Noncoherent: return "nc";
        case Scheme::Qpsk: return "qpsk";
        case Scheme::Qam64: return "qam64";
    }
    return "?";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "nc" || name == "noncoherent" || name == "noncoherent-grassmann")
        return Scheme::Noncoherent;
    if (name == "qpsk" || name == "coherent-qpsk") return Scheme::Qpsk;
    if (name == "qam64" || name == "64qam" || name == "coherent-64qam") return Scheme::Qam64;
    throw ConfigError("unknown scheme '" + std::string(name) + "' (expected nc, qpsk or qam64)");
}

unsigned FrameSpec::bits_per_block(const grassmann::Codebook* cb) const {
    switch (scheme) {
        case Scheme::Noncoherent:
            if (!cb) throw ValidationError("noncoherent frames need a codebook");
            return cb->bits_per_codeword();
        case Scheme::Qpsk: return static_cast<unsigned>(2 * data_symbols());
        case Scheme::Qam64: return static_cast<unsigned>(6 * data_symbols());
    }
    return 0;
}

FrameSpec make_frame_spec(Scheme scheme, std::size_t T) {
    FrameSpec f;
    f.scheme = scheme;
    f.T = T;
    switch (scheme) {
        case Scheme::Noncoherent:
            if (T < 2) throw ValidationError("noncoherent frames need T >= 2");
            break;
        case Scheme::Qpsk:
            if (T < 2) throw ValidationError("QPSK frames need T >= 2");
            f.pilot_positions = {0};
            f.pilot_symbols = {cplx{1.0, 0.0}};
            break;
        case Scheme::Qam64:
            if (T < 4) throw ValidationError("64-QAM frames need T >= 4");
            f.pilot_positions = {0, 1, 2};
            f.pilot_symbols = {cplx{1.0, 0.0}, cplx{0.0, 1.0}, cplx{-1.0, 0.0}};
            break;
    }
    return f;
}

}  // namespace lpd::modem

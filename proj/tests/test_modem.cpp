#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "lpd/error.hpp"
#include "lpd/grassmann.hpp"
#include "lpd/modem.hpp"
#include "lpd/receivers.hpp"
#include "lpd/rng.hpp"

using namespace lpd;
using namespace lpd::modem;

namespace {

const grassmann::Codebook& codebook() {
    static const auto cb = grassmann::design_codebook(4, 64, 300, 7);
    return cb;
}

CVec random_symbols(std::size_t n, Rng& rng) {
    CVec s(n);
    for (auto& v : s) v = rng.complex_normal();
    return s;
}

ChipStream chip_rate(CVec samples) {
    ChipStream s;
    s.samples = std::move(samples);
    s.block_count = s.samples.size() / kChipsPerSymbol;
    return s;
}

}  // namespace

TEST_CASE("m-sequence properties") {
    const auto pn = generate_pn();
    REQUIRE(pn.chips.size() == 31);
    const double sum = std::accumulate(pn.chips.begin(), pn.chips.end(), 0.0);
    CHECK(std::abs(sum) == 1.0);
    CHECK(pn_autocorrelation(pn, 0) == 1.0);
    for (std::size_t lag = 1; lag < 31; ++lag) CHECK(pn_autocorrelation(pn, lag) * 31.0 == -1.0);

    // Every nonzero starting state gives a shift of the same m-sequence.
    for (unsigned state = 1; state < 32; ++state) {
        const auto other = generate_pn(kDefaultPnTaps, state);
        for (std::size_t lag = 1; lag < 31; ++lag) CHECK(pn_autocorrelation(other, lag) * 31.0 == -1.0);
    }
    // x^5 + x^3 + 1 is the other primitive trinomial.
    CHECK_NOTHROW(generate_pn(0b01001, 1));
}

TEST_CASE("PN generator rejects bad inputs") {
    CHECK_THROWS_AS(generate_pn(kDefaultPnTaps, 0), ValidationError);
    CHECK_THROWS_AS(generate_pn(kDefaultPnTaps, 32), ValidationError);
    // x^5 + x^4 + x^3 + x^2 + x + 1 = (x+1)(x^2+x+1)^2 is not primitive.
    CHECK_THROWS_AS(generate_pn(0b11111, 1), ValidationError);
    // No constant term.
    CHECK_THROWS_AS(generate_pn(0b00100, 1), ValidationError);
}

TEST_CASE("bit mapping is a bijection") {
    const auto& cb = codebook();
    CHECK(bits_to_index(index_to_bits(0, 6)) == 0);
    const std::uint8_t zeros[6] = {0, 0, 0, 0, 0, 0};
    const auto x0 = map_bits(zeros, cb);
    CHECK(grassmann::chordal_distance(x0.entries(), cb.row(0)) == 0.0);
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < 64; ++k) {
        const auto bits = index_to_bits(k, 6);
        CHECK(bits_to_index(bits) == k);
        CHECK(demap(k, cb) == bits);
        const auto x = map_bits(bits, cb);
        for (std::size_t j = 0; j < 64; ++j)
            if (grassmann::chordal_distance(x.entries(), cb.row(j)) <= 1e-7) seen.insert(j);
    }
    CHECK(seen.size() == 64);
    const std::uint8_t five[5] = {};
    CHECK_THROWS_AS(map_bits(five, cb), DimensionError);
    // MSB first.
    CHECK(index_to_bits(1, 6) == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1});
}

TEST_CASE("rotation keeps the Grassmann point") {
    const auto& cb = codebook();
    const auto x = cb.codeword(5);
    const auto same = rotate(x, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(same[i] == x[i]);
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto r = rotate(x, rng.uniform_phase());
        CHECK(grassmann::chordal_distance(x, r) <= 1e-7);
        const auto y = random_symbols(4, rng);
        cplx a{}, b{};
        for (std::size_t i = 0; i < 4; ++i) {
            a += std::conj(y[i]) * x[i];
            b += std::conj(y[i]) * r[i];
        }
        CHECK(std::abs(std::norm(a) - std::norm(b)) <= 1e-12);
    }
}

TEST_CASE("rotated entry phase is uniform (chi-square, alpha 0.01)") {
    const auto& cb = codebook();
    Rng rng(17);
    constexpr std::size_t n = 100000, bins = 36;
    std::vector<double> counts(bins, 0.0);
    const auto x = cb.codeword(9);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = std::arg(rotate(x, rng.uniform_phase())[0]) + kPi;
        counts[std::min(bins - 1, static_cast<std::size_t>(ph / kTwoPi * bins))] += 1.0;
    }
    const double expected = static_cast<double>(n) / bins;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const double critical = boost::math::quantile(
        boost::math::complement(boost::math::chi_squared(bins - 1), 0.01));
    CHECK(chi2 < critical);
}

TEST_CASE("spreading preserves energy and round trips") {
    const auto pn = generate_pn();
    const CVec one{1.0};
    const auto chips = spread(one, pn);
    REQUIRE(chips.samples.size() == 31);
    for (auto c : chips.samples) CHECK(std::abs(std::abs(c) - 1.0 / std::sqrt(31.0)) <= 1e-15);

    Rng rng(1);
    const auto s = random_symbols(4 * 250, rng);
    const auto st = spread(s, pn, 4);
    CHECK(st.block_count == 250);
    CHECK(st.samples_per_block() == 124);
    const auto back = despread(st, pn);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(back[i] - s[i]));
    CHECK(worst <= 1e-12);
    CHECK_THROWS_AS(spread(random_symbols(5, rng), pn, 4), DimensionError);
}

TEST_CASE("despread framing error") {
    const auto pn = generate_pn();
    CHECK_THROWS_AS(despread(chip_rate(CVec(40)), pn), DimensionError);
}

TEST_CASE("despreading is unitary on noise") {
    const auto pn = generate_pn();
    Rng rng(2);
    const double var = 0.7;
    CVec noise(31 * 100000);
    for (auto& v : noise) v = rng.complex_normal(var);
    const auto s = despread(chip_rate(noise), pn);
    double p = 0.0;
    cplx lag1{};
    for (std::size_t i = 0; i < s.size(); ++i) {
        p += std::norm(s[i]);
        if (i) lag1 += s[i] * std::conj(s[i - 1]);
    }
    p /= static_cast<double>(s.size());
    CHECK(std::abs(p / var - 1.0) <= 0.03);
    CHECK(std::abs(lag1) / static_cast<double>(s.size()) <= 0.05 * var);
}

TEST_CASE("chip-rate SNR is the symbol SNR minus the processing gain") {
    const auto pn = generate_pn();
    Rng rng(21);
    const auto s = random_symbols(1000000 / 31, rng);
    const auto chips = spread(s, pn);
    double chip_power = 0.0, sym_power = 0.0;
    for (auto c : chips.samples) chip_power += std::norm(c);
    for (auto v : s) sym_power += std::norm(v);
    chip_power /= static_cast<double>(chips.samples.size());
    sym_power /= static_cast<double>(s.size());
    // Same noise variance per sample in both domains.
    const double gap_db = 10.0 * std::log10(sym_power / chip_power);
    CHECK(gap_db == doctest::Approx(10.0 * std::log10(31.0)).epsilon(1e-9));
}

TEST_CASE("one-chip misalignment collapses the correlation") {
    const auto pn = generate_pn();
    Rng rng(4);
    const CVec s(200, cplx{1.0, 0.0});
    auto st = spread(s, pn);
    std::rotate(st.samples.begin(), st.samples.begin() + 1, st.samples.end());
    const auto back = despread(st, pn);
    for (auto v : back) CHECK(std::abs(v - cplx{-1.0 / 31.0, 0.0}) <= 1e-12);
}

TEST_CASE("single sample per chip is a pass-through") {
    const auto pn = generate_pn();
    Rng rng(6);
    const auto st = spread(random_symbols(8, rng), pn, 4);
    const PulseShape shape{1, 0.25, 10};
    const auto shaped = pulse_shape(st, shape);
    CHECK(shaped.samples == st.samples);
    CHECK(matched_filter(shaped, shape).samples == st.samples);
    CHECK_THROWS_AS(pulse_shape(st, PulseShape{4, 1.5, 10}), ValidationError);
    CHECK_THROWS_AS(rrc_taps(4, -0.1, 10), ValidationError);
}

TEST_CASE("RRC taps have unit energy and are symmetric") {
    for (double beta : {0.0, 0.25, 0.5, 1.0}) {
        const auto h = rrc_taps(8, beta, 10);
        REQUIRE(h.size() == 81);
        double e = 0.0;
        for (double v : h) e += v * v;
        CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(h[h.size() - 1 - i]));
    }
}

TEST_CASE("RRC cascade is Nyquist") {
    // Impulse response of shape -> matched filter sampled at chip spacing.
    for (std::size_t spc : {4u, 8u}) {
        const auto h = rrc_taps(spc, 0.25, PulseShape{}.span_chips);
        const std::size_t mid = h.size() - 1;
        RVec rc(2 * h.size() - 1, 0.0);
        for (std::size_t i = 0; i < h.size(); ++i)
            for (std::size_t j = 0; j < h.size(); ++j) rc[i + j] += h[i] * h[j];
        CHECK(rc[mid] == doctest::Approx(1.0).epsilon(1e-12));
        double isi = 0.0;
        for (std::size_t k = spc; k <= mid; k += spc) isi = std::max(isi, std::abs(rc[mid + k]));
        CAPTURE(spc);
        CHECK(isi <= 1e-3);
    }
}

TEST_CASE("shape then matched filter reproduces the chips") {
    const auto pn = generate_pn();
    Rng rng(8);
    const auto st = spread(random_symbols(40, rng), pn, 4);
    const PulseShape shape{8, 0.25, 24};
    const auto shaped = pulse_shape(st, shape);
    CHECK(shaped.samples_per_chip == 8);
    CHECK(shaped.delay == 96);
    const auto mf = matched_filter(shaped, shape);
    REQUIRE(mf.samples.size() == st.samples.size());
    double err = 0.0, power = 0.0;
    for (std::size_t i = 0; i < st.samples.size(); ++i) {
        err += std::norm(mf.samples[i] - st.samples[i]);
        power += std::norm(st.samples[i]);
    }
    CHECK(std::sqrt(err / power) <= 1e-3);
    const auto sym = despread(mf, pn);
    const auto ref = despread(st, pn);
    for (std::size_t i = 0; i < sym.size(); ++i) CHECK(std::abs(sym[i] - ref[i]) <= 1e-3 * std::abs(ref[i]) + 1e-3);
}

TEST_CASE("matched filter preserves chip power") {
    Rng rng(12);
    ChipStream st = chip_rate(random_symbols(31 * 2000, rng));
    st.symbols_per_block = 1;
    double pin = 0.0;
    for (auto v : st.samples) pin += std::norm(v);
    const PulseShape shape{8, 0.25, 24};
    const auto mf = matched_filter(pulse_shape(st, shape), shape);
    double pout = 0.0;
    for (auto v : mf.samples) pout += std::norm(v);
    CHECK(std::abs(pout / pin - 1.0) <= 0.02);
}

TEST_CASE("timing acquisition") {
    const auto pn = generate_pn();
    Rng rng(31);
    const auto s = random_symbols(100, rng);
    const auto st = spread(s, pn);
    for (std::size_t d : {0u, 7u, 30u}) {
        CVec rx(d, cplx{});
        rx.insert(rx.end(), st.samples.begin(), st.samples.end());
        const auto est = acquire_timing(rx, pn);
        CHECK(est.delay_chips == d);
        CHECK(!est.low_confidence);
    }
    CHECK_THROWS_AS(acquire_timing(CVec(80), pn), DimensionError);
}

TEST_CASE("timing acquisition at 0 dB symbol SNR") {
    const auto pn = generate_pn();
    Rng rng(32);
    int hits = 0;
    constexpr int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        CVec sym(100);
        for (auto& v : sym) v = std::polar(1.0, rng.uniform_phase());
        const auto st = spread(sym, pn);
        CVec rx(7, cplx{});
        rx.insert(rx.end(), st.samples.begin(), st.samples.end());
        // Unit chip-domain noise variance gives 0 dB after despreading.
        for (auto& v : rx) v += rng.complex_normal(1.0);
        if (acquire_timing(rx, pn).delay_chips == 7) ++hits;
    }
    CHECK(hits >= 990);
}

TEST_CASE("noiseless end-to-end round trip over every codeword") {
    const auto& cb = codebook();
    const auto pn = generate_pn();
    Rng rng(41);
    for (std::size_t spc : {1u, 8u}) {
        const PulseShape shape{spc, 0.25, 24};
        std::size_t errors = 0;
        for (std::size_t k = 0; k < 64; ++k) {
            for (int ph = 0; ph < 16; ++ph) {
                const auto bits = index_to_bits(k, 6);
                const auto x = rotate(map_bits(bits, cb), rng.uniform_phase());
                const auto tx = pulse_shape(spread(x.entries(), pn, 4), shape);
                const auto y = despread(matched_filter(tx, shape), pn);
                if (demap(receivers::noncoherent_ml_detect(y, cb), cb) != bits) ++errors;
            }
        }
        CAPTURE(spc);
        CHECK(errors == 0);
    }
}

TEST_CASE("frame specs") {
    const auto nc = make_frame_spec(Scheme::Noncoherent, 4);
    const auto qpsk = make_frame_spec(Scheme::Qpsk, 4);
    const auto qam = make_frame_spec(Scheme::Qam64, 4);
    CHECK(nc.pilot_positions.empty());
    CHECK(qpsk.pilot_positions.size() == 1);
    CHECK(qpsk.data_symbols() == 3);
    CHECK(qam.pilot_positions.size() == 3);
    CHECK(qam.data_symbols() == 1);
    CHECK(nc.bits_per_block(&codebook()) == 6);
    CHECK(qpsk.bits_per_block(nullptr) == 6);
    CHECK(qam.bits_per_block(nullptr) == 6);
    for (auto p : qam.pilot_symbols) CHECK(std::abs(p) == doctest::Approx(1.0));
    CHECK(parse_scheme("qam64") == Scheme::Qam64);
    CHECK_THROWS_AS(parse_scheme("bpsk"), ConfigError);
    CHECK(scheme_name(Scheme::Noncoherent) == "nc");
}

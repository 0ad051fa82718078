#include <algorithm>
#include <bitset>
#include <cmath>
#include <map>

#include "doctest.h"
#include "lpd/channel.hpp"
#include "lpd/error.hpp"
#include "lpd/grassmann.hpp"
#include "lpd/modem.hpp"
#include "lpd/receivers.hpp"
#include "lpd/rng.hpp"

using namespace lpd;
using namespace lpd::receivers;
using modem::Scheme;

namespace {

const grassmann::Codebook& codebook() {
    static const auto cb = grassmann::design_codebook(4, 64, 1000, 7);
    return cb;
}

std::vector<std::uint8_t> bits_of(unsigned v, unsigned n) {
    std::vector<std::uint8_t> b(n);
    for (unsigned i = 0; i < n; ++i) b[i] = (v >> (n - 1 - i)) & 1u;
    return b;
}

unsigned pack(std::span<const std::uint8_t> b) {
    unsigned v = 0;
    for (auto x : b) v = (v << 1) | x;
    return v;
}

}  // namespace

TEST_CASE("ML detector on noiseless faded codewords") {
    const auto& cb = codebook();
    Rng rng(1);
    for (std::size_t k = 0; k < cb.K(); ++k) {
        CVec y(cb.row(k).begin(), cb.row(k).end());
        CHECK(noncoherent_ml_detect(y, cb) == k);
        for (int t = 0; t < 16; ++t) {
            const cplx h = rng.complex_normal() * std::polar(1.0, rng.uniform_phase());
            CVec z(y);
            for (auto& v : z) v *= h;
            CHECK(noncoherent_ml_detect(z, cb) == k);
        }
    }
}

TEST_CASE("ML detector is scale invariant and breaks ties low") {
    const auto& cb = codebook();
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        CVec y(4);
        for (auto& v : y) v = rng.complex_normal();
        const cplx c = rng.complex_normal() + cplx{1e-3, 0.0};
        CVec z(y);
        for (auto& v : z) v *= c;
        CHECK(noncoherent_ml_detect(y, cb) == noncoherent_ml_detect(z, cb));
    }
    const grassmann::Codeword a(CVec{1, 0}), b(CVec{0, 1});
    const grassmann::Codeword words[] = {a, b, a};
    const auto tied = grassmann::Codebook::from_codewords(words);
    CHECK(noncoherent_ml_detect(CVec{1, 0}, tied) == 0);
    CHECK(noncoherent_ml_detect(CVec{1, 1}, tied) == 0);
    CHECK_THROWS_AS(noncoherent_ml_detect(CVec{1, 0, 0}, tied), DimensionError);
}

TEST_CASE("LS channel estimate") {
    const cplx h{0.3, -1.2};
    const CVec one{1.0};
    CHECK(estimate_channel_ls(CVec{h}, one) == h);
    const CVec pilots{1.0, cplx{0.0, 1.0}, -1.0};
    CVec obs(3);
    for (int i = 0; i < 3; ++i) obs[i] = h * pilots[i];
    CHECK(std::abs(estimate_channel_ls(obs, pilots) - h) <= 1e-15);
    CHECK_THROWS_AS(estimate_channel_ls(CVec{1.0}, CVec{0.0}), ValidationError);

    Rng rng(3);
    const double var = 0.2;
    double acc = 0.0;
    constexpr int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < 3; ++i) obs[i] = h * pilots[i] + rng.complex_normal(var);
        acc += std::norm(estimate_channel_ls(obs, pilots) - h);
    }
    CHECK(acc / trials == doctest::Approx(var / 3.0).epsilon(0.05));
}

TEST_CASE("LMMSE equalizer") {
    const cplx h{0.5, 0.5};
    const cplx y{1.0, -2.0};
    const auto zf = lmmse_equalize(y, h, 0.0);
    CHECK(std::abs(zf.value - y / h) <= 1e-15);
    CHECK(!zf.degenerate);
    CHECK(lmmse_equalize(cplx{}, h, 0.3).value == cplx{});
    const auto deg = lmmse_equalize(y, cplx{}, 0.0);
    CHECK(deg.degenerate);
    CHECK(deg.value == cplx{});
    CHECK(std::abs(lmmse_equalize(y, h, 0.5, 2.0).value - std::conj(h) * y / (std::norm(h) + 0.25)) <=
          1e-15);

    // LMMSE has lower MSE than zero forcing at 0 dB symbol SNR.
    Rng rng(4);
    double mse_l = 0.0, mse_z = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const cplx hh = rng.complex_normal();
        const cplx s = std::polar(1.0, rng.uniform_phase());
        const cplx obs = hh * s + rng.complex_normal(1.0);
        mse_l += std::norm(lmmse_equalize(obs, hh, 1.0).value - s);
        mse_z += std::norm(lmmse_equalize(obs, hh, 0.0).value - s);
    }
    CHECK(mse_l <= mse_z);
}

TEST_CASE("QPSK constellation") {
    const std::uint8_t b00[2] = {0, 0};
    CHECK(std::abs(qpsk_mod(b00) - cplx{1.0, 1.0} / std::sqrt(2.0)) <= 1e-15);
    double power = 0.0;
    for (unsigned v = 0; v < 4; ++v) {
        const auto b = bits_of(v, 2);
        const cplx s = qpsk_mod(b);
        power += std::norm(s);
        std::uint8_t out[2];
        qpsk_demod(s, out);
        CHECK(pack(out) == v);
        // Neighbours (90 degrees apart) differ in one bit.
        std::uint8_t nb[2];
        qpsk_demod(s * cplx{0.0, 1.0}, nb);
        CHECK(std::bitset<2>(pack(nb) ^ v).count() == 1);
    }
    CHECK(power / 4.0 == doctest::Approx(1.0));
}

TEST_CASE("64-QAM constellation") {
    double power = 0.0;
    std::map<int, unsigned> i_label, q_label;
    const double unit = 1.0 / std::sqrt(42.0);
    for (unsigned v = 0; v < 64; ++v) {
        const auto b = bits_of(v, 6);
        const cplx s = qam64_mod(b);
        power += std::norm(s);
        std::uint8_t out[6];
        qam64_demod(s, out);
        CHECK(pack(out) == v);
        // Small perturbations stay in the decision region.
        qam64_demod(s + cplx{0.9 * unit, -0.9 * unit}, out);
        CHECK(pack(out) == v);
        const int li = static_cast<int>(std::lround(s.real() / unit));
        const int lq = static_cast<int>(std::lround(s.imag() / unit));
        CHECK(std::abs(li) % 2 == 1);
        CHECK(std::abs(li) <= 7);
        i_label[li] = v >> 3;
        q_label[lq] = v & 7u;
    }
    CHECK(power / 64.0 == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(i_label.size() == 8);
    REQUIRE(q_label.size() == 8);
    // Gray: adjacent levels on each axis differ in one bit.
    for (int l = -7; l < 7; l += 2) {
        CHECK(std::bitset<3>(i_label[l] ^ i_label[l + 2]).count() == 1);
        CHECK(std::bitset<3>(q_label[l] ^ q_label[l + 2]).count() == 1);
    }
}

TEST_CASE("BER record merge") {
    BerRecord a{100, 3, 10}, b{50, 1, 5}, c{7, 7, 1};
    CHECK((a + b) + c == a + (b + c));
    CHECK(a + b == b + a);
    CHECK((a + b).ber() == doctest::Approx(4.0 / 150.0));
    CHECK(BerRecord{}.ber() == 0.0);
}

TEST_CASE("every scheme carries six bits per block and is error free without noise") {
    const auto& cb = codebook();
    const auto pn = modem::generate_pn();
    for (Scheme s : {Scheme::Noncoherent, Scheme::Qpsk, Scheme::Qam64}) {
        const auto frame = modem::make_frame_spec(s, 4);
        const auto* book = s == Scheme::Noncoherent ? &cb : nullptr;
        CHECK(frame.bits_per_block(book) == 6);
        Rng data(5), noise(6), ch(7);
        BerRecord total;
        for (std::size_t spc : {1u, 4u}) {
            for (int b = 0; b < 200; ++b) {
                const BlockChannel channel{ch.complex_normal(), 0.0};
                total += run_block(frame, book, pn, channel, data, noise, {spc, 0.25, 24});
            }
        }
        CAPTURE(modem::scheme_name(s));
        CHECK(total.blocks == 400);
        CHECK(total.bits_sent == 2400);
        CHECK(total.bit_errors == 0);
    }
}

TEST_CASE("transmit power is equal across schemes") {
    const auto& cb = codebook();
    double power[3] = {};
    int idx = 0;
    for (Scheme s : {Scheme::Noncoherent, Scheme::Qpsk, Scheme::Qam64}) {
        const auto frame = modem::make_frame_spec(s, 4);
        Rng rng(9);
        double p = 0.0;
        constexpr int blocks = 50000;
        for (int b = 0; b < blocks; ++b)
            for (auto v : build_block(frame, s == Scheme::Noncoherent ? &cb : nullptr, rng).symbols)
                p += std::norm(v);
        power[idx++] = p / (4.0 * blocks);
    }
    CHECK(power[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(power[1] / power[0] - 1.0) <= 0.005);
    CHECK(std::abs(power[2] / power[0] - 1.0) <= 0.005);
}

TEST_CASE("BER falls with SNR for every scheme") {
    const auto& cb = codebook();
    const auto pn = modem::generate_pn();
    for (Scheme s : {Scheme::Noncoherent, Scheme::Qpsk, Scheme::Qam64}) {
        const auto frame = modem::make_frame_spec(s, 4);
        const auto* book = s == Scheme::Noncoherent ? &cb : nullptr;
        double prev = 1.0;
        for (double snr : {0.0, 10.0, 20.0}) {
            Rng data(11), noise(12), ch(13);
            BerRecord r;
            for (int b = 0; b < 4000; ++b)
                r += run_block(frame, book, pn, {ch.complex_normal(), channel::chip_noise_variance(snr)},
                               data, noise);
            CAPTURE(modem::scheme_name(s));
            CAPTURE(snr);
            CHECK(r.ber() < prev);
            prev = r.ber();
        }
    }
}

TEST_CASE("noncoherent BER at +15 dB on the sweep axis") {
    const auto& cb = codebook();
    const auto pn = modem::generate_pn();
    const auto frame = modem::make_frame_spec(Scheme::Noncoherent, 4);
    const double var = channel::LinkBudget{}.bob_noise_variance(15.0);
    Rng data(14), noise(15), ch(16);
    BerRecord r;
    for (int b = 0; b < 20000; ++b) r += run_block(frame, &cb, pn, {ch.complex_normal(), var}, data, noise);
    CHECK(r.ber() <= 1e-3);
}

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lpd/error.hpp"
#include "lpd/grassmann.hpp"
#include "lpd/rng.hpp"

using namespace lpd;
using namespace lpd::grassmann;
namespace fs = std::filesystem;

namespace {

CVec random_unit(std::size_t t, Rng& rng) {
    CVec v(t);
    double e = 0.0;
    for (auto& x : v) {
        x = rng.complex_normal();
        e += std::norm(x);
    }
    for (auto& x : v) x /= std::sqrt(e);
    return v;
}

// Independent O(K^2) oracle written without the kernels.
double brute_min_distance(const Codebook& cb) {
    double best = 1.0;
    for (std::size_t i = 0; i < cb.K(); ++i)
        for (std::size_t j = i + 1; j < cb.K(); ++j) {
            cplx ip{};
            for (std::size_t t = 0; t < cb.T(); ++t) ip += std::conj(cb.row(i)[t]) * cb.row(j)[t];
            best = std::min(best, std::sqrt(std::max(0.0, 1.0 - std::norm(ip))));
        }
    return best;
}

fs::path temp_file(const char* name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST_CASE("chordal distance examples") {
    const CVec e1{1, 0, 0, 0};
    CHECK(chordal_distance(e1, e1) == 0.0);
    CHECK(chordal_distance(CVec{1, 0}, CVec{0, 1}) == 1.0);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(chordal_distance(CVec{1, 0}, CVec{h, h}) == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK_THROWS_AS(chordal_distance(CVec{1, 0}, CVec{1, 0, 0}), DimensionError);
}

TEST_CASE("chordal distance is symmetric and phase invariant") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_unit(4, rng);
        const auto b = random_unit(4, rng);
        CVec ar(a), br(b);
        const cplx pa = std::polar(1.0, rng.uniform_phase());
        const cplx pb = std::polar(1.0, rng.uniform_phase());
        for (auto& v : ar) v *= pa;
        for (auto& v : br) v *= pb;
        const double d = chordal_distance(a, b);
        CHECK(std::abs(d - chordal_distance(b, a)) <= 1e-12);
        CHECK(std::abs(d - chordal_distance(ar, br)) <= 1e-12);
        CHECK(chordal_distance(a, ar) <= 1e-7);
    }
}

TEST_CASE("codeword validation") {
    CHECK_THROWS_AS(Codeword(CVec{1.0}), DimensionError);
    CHECK_THROWS_AS(Codeword(CVec{1.0, 1.0}), ValidationError);
    CHECK_NOTHROW(Codeword(CVec{1.0, 0.0}));
    CHECK_THROWS_AS(Codeword::normalized(CVec{0.0, 0.0}), ValidationError);
    const auto w = Codeword::normalized(CVec{3.0, cplx{0.0, 4.0}});
    CHECK(std::abs(w[0] - 0.6) < 1e-15);
    CHECK(std::abs(w[1] - cplx{0.0, 0.8}) < 1e-15);
}

TEST_CASE("min distance examples") {
    const Codeword a(CVec{1, 0}), b(CVec{0, 1});
    const Codeword words[] = {a, b};
    CHECK(min_distance(Codebook::from_codewords(words)) == 1.0);
    const Codeword dup[] = {a, b, a};
    CHECK(min_distance(Codebook::from_codewords(dup)) == 0.0);
    const Codeword single[] = {a};
    CHECK_THROWS_AS(min_distance(Codebook::from_codewords(single)), ValidationError);

    const auto cb = random_codebook(4, 64, 3);
    CHECK(cb.min_chordal_distance() == min_distance(cb));
    CHECK(std::abs(min_distance(cb) - brute_min_distance(cb)) <= 1e-12);
}

TEST_CASE("design on T=2, K=2 reaches the orthogonal pair") {
    const auto cb = design_codebook(2, 2, 1000, 7);
    CHECK(cb.min_chordal_distance() >= 0.999);
}

TEST_CASE("design beats the best of 20 random codebooks at T=4, K=64") {
    const auto cb = design_codebook(4, 64, 1000, 7);
    double best = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) best = std::max(best, random_codebook(4, 64, s).min_chordal_distance());
    CHECK(cb.min_chordal_distance() > best);
    CHECK(cb.spectral_efficiency() == 1.5);
    CHECK(cb.bits_per_codeword() == 6u);
    CHECK(std::abs(cb.min_chordal_distance() - brute_min_distance(cb)) <= 1e-12);
    CHECK(cb.min_chordal_distance() == min_distance(cb));
}

TEST_CASE("design is monotone in the surrogate and keeps unit norms") {
    std::size_t steps = 0, accepted = 0;
    const auto cb = design_codebook(4, 16, 400, 11, {}, [&](const DesignStep& s) {
        ++steps;
        CHECK(s.objective_after >= s.objective_before);
        if (s.step > 0.0) ++accepted;
        CHECK(s.max_norm_error <= 1e-9);
    });
    CHECK(steps == 400);
    CHECK(accepted > 0);
    CHECK(cb.min_chordal_distance() >= random_codebook(4, 16, 11).min_chordal_distance());
    for (std::size_t k = 0; k < cb.K(); ++k) {
        double e = 0.0;
        for (auto v : cb.row(k)) e += std::norm(v);
        CHECK(std::abs(std::sqrt(e) - 1.0) <= 1e-9);
    }
}

TEST_CASE("design is deterministic") {
    const auto a = design_codebook(4, 16, 200, 3);
    const auto b = design_codebook(4, 16, 200, 3);
    CHECK(a.data() == b.data());
    const auto c = design_codebook(4, 16, 200, 4);
    CHECK(a.data() != c.data());
}

TEST_CASE("surrogate bounds the max coherence") {
    const auto cb = random_codebook(4, 16, 9);
    double max_coh = 0.0;
    for (std::size_t i = 0; i < cb.K(); ++i)
        for (std::size_t j = i + 1; j < cb.K(); ++j)
            max_coh = std::max(max_coh, 1.0 - std::pow(chordal_distance(cb.row(i), cb.row(j)), 2));
    const double beta = 50.0;
    const double s = coherence_surrogate(cb.data(), 4, 16, beta);
    CHECK(s >= max_coh - 1e-12);
    CHECK(s <= max_coh + std::log(16.0 * 15.0 / 2.0) / beta + 1e-12);
}

TEST_CASE("codebook save and load round trip") {
    const auto cb = design_codebook(4, 64, 100, 2);
    const auto path = temp_file("lpd_test_codebook.txt");
    save_codebook(cb, path);
    const auto back = load_codebook(path);
    REQUIRE(back.T() == 4);
    REQUIRE(back.K() == 64);
    double worst = 0.0;
    for (std::size_t i = 0; i < cb.data().size(); ++i)
        worst = std::max(worst, std::abs(cb.data()[i] - back.data()[i]));
    CHECK(worst <= 1e-12);
    fs::remove(path);
}

TEST_CASE("malformed codebook files") {
    const auto path = temp_file("lpd_test_bad_codebook.txt");
    {
        std::ofstream f(path);
        f << "# comment\n2 2\n1 0 0 0\n0 0 1\n";
    }
    try {
        load_codebook(path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    {
        std::ofstream f(path);
        f << "2 2\n1 0 0 0\n0 0 0 0\n";
    }
    CHECK_THROWS_AS(load_codebook(path), ValidationError);
    fs::remove(path);
}

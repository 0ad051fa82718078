#include "lpd/grassmann.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "lpd/error.hpp"
#include "lpd/kernels.hpp"
#include "lpd/rng.hpp"

namespace lpd::grassmann {
namespace {

const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

double norm_of(std::span<const cplx> v) {
    return std::sqrt(kernels::active().energy(as_doubles(v.data()), v.size()));
}

// Soft-max accumulator kept as (max, sum exp(beta (g - max))).
struct LogSumExp {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;

    void add_block(const double* g, std::size_t n, double beta) {
        if (n == 0) return;
        double block_max = g[0];
        for (std::size_t i = 1; i < n; ++i) block_max = std::max(block_max, g[i]);
        double block_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) block_sum += std::exp(beta * (g[i] - block_max));
        if (block_max > max) {
            sum = sum * std::exp(beta * (max - block_max)) + block_sum;
            max = block_max;
        } else {
            sum += block_sum * std::exp(beta * (block_max - max));
        }
    }

    double value(double beta) const { return max + std::log(sum) / beta; }
};

struct Evaluation {
    double surrogate = 0.0;  // soft-max coherence
    double max_coherence = 0.0;
};

Evaluation evaluate(std::span<const cplx> rows, std::size_t t, std::size_t k, double beta,
                    std::vector<double>& scratch) {
    const auto& kt = kernels::active();
    LogSumExp lse;
    scratch.resize(k);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const std::size_t count = k - i - 1;
        kt.coherence_row(as_doubles(rows.data() + i * t), as_doubles(rows.data() + (i + 1) * t),
                         count, t, scratch.data());
        lse.add_block(scratch.data(), count, beta);
    }
    return {lse.value(beta), lse.max};
}

double distance_from_coherence(double g) { return std::sqrt(std::clamp(1.0 - g, 0.0, 1.0)); }

void normalize_rows(CVec& rows, std::size_t t, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
        std::span<cplx> r{rows.data() + i * t, t};
        const double n = norm_of(r);
        for (auto& v : r) v /= n;
    }
}

double max_norm_error(const CVec& rows, std::size_t t, std::size_t k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        worst = std::max(worst, std::abs(norm_of({rows.data() + i * t, t}) - 1.0));
    return worst;
}

// Ascent direction of the negated surrogate, projected onto the horizontal
// space (I - x x^H) of each line.
void ascent_direction(const CVec& rows, std::size_t t, std::size_t k, double beta,
                      const Evaluation& at, CVec& dir, std::vector<double>& scratch) {
    const auto& kt = kernels::active();
    dir.assign(rows.size(), cplx{});
    scratch.resize(2 * k);
    // sum exp(beta (g - max)) is needed to turn exponentials into weights.
    const double log_z = beta * (at.surrogate - at.max_coherence);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const std::size_t count = k - i - 1;
        const cplx* xi = rows.data() + i * t;
        kt.cdot_row(as_doubles(xi), as_doubles(rows.data() + (i + 1) * t), count, t,
                    scratch.data());
        cplx* di = dir.data() + i * t;
        for (std::size_t c = 0; c < count; ++c) {
            const cplx ip{scratch[2 * c], scratch[2 * c + 1]};  // x_i^H x_j
            const double g = std::norm(ip);
            const double w = std::exp(beta * (g - at.max_coherence) - log_z);
            if (w == 0.0) continue;
            const std::size_t j = i + 1 + c;
            const cplx* xj = rows.data() + j * t;
            cplx* dj = dir.data() + j * t;
            const cplx a = -2.0 * w * std::conj(ip);
            const cplx b = -2.0 * w * ip;
            for (std::size_t n = 0; n < t; ++n) {
                di[n] += a * xj[n];
                dj[n] += b * xi[n];
            }
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        const cplx* xi = rows.data() + i * t;
        cplx* di = dir.data() + i * t;
        cplx proj{};
        kt.cdot(as_doubles(xi), as_doubles(di), t, &reinterpret_cast<double(&)[2]>(proj)[0],
                &reinterpret_cast<double(&)[2]>(proj)[1]);
        for (std::size_t n = 0; n < t; ++n) di[n] -= xi[n] * proj;
    }
}

CVec gaussian_rows(std::size_t t, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    CVec rows(t * k);
    for (auto& v : rows) v = rng.complex_normal();
    normalize_rows(rows, t, k);
    return rows;
}

}  // namespace

Codeword::Codeword(CVec entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) throw DimensionError("codeword length must be at least 2");
    const double n = norm_of(entries_);
    if (!(std::abs(n - 1.0) <= kUnitNormTolerance))
        throw ValidationError("codeword is not unit norm (norm = " + std::to_string(n) + ")");
}

Codeword Codeword::normalized(CVec entries) {
    if (entries.size() < 2) throw DimensionError("codeword length must be at least 2");
    const double n = norm_of(entries);
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalize a zero vector");
    for (auto& v : entries) v /= n;
    return Codeword(std::move(entries), Unchecked{});
}

Codebook::Codebook(std::size_t t, std::size_t k, CVec rows, std::uint64_t design_seed,
                   std::size_t design_iterations)
    : t_(t), k_(k), rows_(std::move(rows)), design_seed_(design_seed),
      design_iterations_(design_iterations) {
    if (t_ < 2) throw DimensionError("codebook T must be at least 2");
    if (k_ < 1) throw DimensionError("codebook K must be positive");
    if (rows_.size() != t_ * k_)
        throw DimensionError("codebook storage does not match T*K entries");
    for (std::size_t i = 0; i < k_; ++i) {
        const double n = norm_of(row(i));
        if (!(std::abs(n - 1.0) <= kUnitNormTolerance))
            throw ValidationError("codeword " + std::to_string(i) + " is not unit norm (norm = " +
                                  std::to_string(n) + ")");
    }
    min_distance_ = k_ >= 2 ? min_distance(*this) : 0.0;
}

Codebook Codebook::from_codewords(std::span<const Codeword> words) {
    if (words.empty()) throw DimensionError("empty codeword list");
    const std::size_t t = words.front().size();
    CVec rows;
    rows.reserve(t * words.size());
    for (const auto& w : words) {
        if (w.size() != t) throw DimensionError("codewords have different lengths");
        rows.insert(rows.end(), w.entries().begin(), w.entries().end());
    }
    return Codebook(t, words.size(), std::move(rows));
}

Codeword Codebook::codeword(std::size_t k) const {
    auto r = row(k);
    return Codeword(CVec(r.begin(), r.end()));
}

double Codebook::spectral_efficiency() const {
    return std::log2(static_cast<double>(k_)) / static_cast<double>(t_);
}

unsigned Codebook::bits_per_codeword() const {
    if (!std::has_single_bit(k_)) throw ValidationError("K is not a power of two");
    return static_cast<unsigned>(std::countr_zero(k_));
}

double chordal_distance(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size())
        throw DimensionError("chordal_distance: lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()) + " differ");
    double re = 0.0, im = 0.0;
    kernels::active().cdot(as_doubles(a.data()), as_doubles(b.data()), a.size(), &re, &im);
    return distance_from_coherence(re * re + im * im);
}

double chordal_distance(const Codeword& a, const Codeword& b) {
    return chordal_distance(a.entries(), b.entries());
}

double min_distance(const Codebook& cb) {
    if (cb.K() < 2) throw ValidationError("minimum distance needs at least two codewords");
    const auto& kt = kernels::active();
    const std::size_t t = cb.T(), k = cb.K();
    std::vector<double> g(k);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const std::size_t count = k - i - 1;
        kt.coherence_row(as_doubles(cb.row(i).data()), as_doubles(cb.row(i + 1).data()), count, t,
                         g.data());
        for (std::size_t c = 0; c < count; ++c) worst = std::max(worst, g[c]);
    }
    return distance_from_coherence(worst);
}

double coherence_surrogate(std::span<const cplx> rows, std::size_t t, std::size_t k, double beta) {
    if (rows.size() != t * k) throw DimensionError("coherence_surrogate: storage mismatch");
    std::vector<double> scratch;
    return evaluate(rows, t, k, beta, scratch).surrogate;
}

Codebook random_codebook(std::size_t t, std::size_t k, std::uint64_t seed) {
    if (t < 2 || k < 1) throw DimensionError("random_codebook: need T >= 2 and K >= 1");
    return Codebook(t, k, gaussian_rows(t, k, seed), seed, 0);
}

Codebook design_codebook(std::size_t t, std::size_t k, std::size_t iterations, std::uint64_t seed,
                         const DesignParams& params, const DesignObserver& observer) {
    if (t < 2) throw DimensionError("design_codebook: T must be at least 2");
    if (k < 2) throw DimensionError("design_codebook: K must be at least 2");
    if (iterations < 1) throw ValidationError("design_codebook: iterations must be positive");
    if (params.beta0 <= 0.0 || params.beta_growth < 1.0 || params.beta_period == 0 ||
        params.initial_step <= 0.0)
        throw ValidationError("design_codebook: invalid design parameters");

    CVec rows = gaussian_rows(t, k, seed);
    CVec trial(rows.size());
    CVec dir;
    std::vector<double> scratch;

    double beta = params.beta0;
    Evaluation current = evaluate(rows, t, k, beta, scratch);
    CVec best = rows;
    double best_coherence = current.max_coherence;
    double step = params.initial_step;

    for (std::size_t it = 0; it < iterations; ++it) {
        if (it > 0 && it % params.beta_period == 0) {
            beta *= params.beta_growth;
            current = evaluate(rows, t, k, beta, scratch);
        }
        ascent_direction(rows, t, k, beta, current, dir, scratch);

        DesignStep record;
        record.iteration = it;
        record.beta = beta;
        record.objective_before = -current.surrogate;
        record.objective_after = record.objective_before;

        // Backtracking: start at twice the last accepted step (capped), halve on failure.
        double s = std::min(params.initial_step, 2.0 * step);
        while (s >= params.min_step) {
            for (std::size_t n = 0; n < rows.size(); ++n) trial[n] = rows[n] + s * dir[n];
            normalize_rows(trial, t, k);
            const Evaluation cand = evaluate(trial, t, k, beta, scratch);
            if (cand.surrogate < current.surrogate) {
                rows.swap(trial);
                current = cand;
                step = s;
                record.step = s;
                record.objective_after = -cand.surrogate;
                break;
            }
            s *= 0.5;
        }
        if (current.max_coherence < best_coherence) {
            best_coherence = current.max_coherence;
            best = rows;
        }
        if (observer) {
            record.max_norm_error = max_norm_error(rows, t, k);
            record.min_distance = distance_from_coherence(current.max_coherence);
            observer(record);
        }
        if (record.step == 0.0) step = params.initial_step;
    }
    return Codebook(t, k, std::move(best), seed, iterations);
}

void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    char buf[64];
    out << "# grassmannian codebook: T K header, then K rows of interleaved re im\n";
    out << "# design_seed=" << cb.design_seed() << " design_iterations=" << cb.design_iterations();
    std::snprintf(buf, sizeof buf, "%.17g", cb.min_chordal_distance());
    out << " min_chordal_distance=" << buf << "\n";
    out << cb.T() << " " << cb.K() << "\n";
    for (std::size_t k = 0; k < cb.K(); ++k) {
        auto r = cb.row(k);
        for (std::size_t n = 0; n < r.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g %.17g", r[n].real(), r[n].imag());
            out << (n ? " " : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw Error("failed writing " + path.string());
}

namespace {

std::vector<double> parse_numbers(const std::string& line, std::size_t line_no,
                                  const std::string& what) {
    std::vector<double> values;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
        if (p >= end) break;
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{})
            throw ParseError(what + " (line " + std::to_string(line_no) + "): invalid number");
        values.push_back(v);
        p = next;
    }
    return values;
}

std::uint64_t meta_value(const std::string& line, const std::string& key) {
    const auto pos = line.find(key + "=");
    if (pos == std::string::npos) return 0;
    return std::stoull(line.substr(pos + key.size() + 1));
}

}  // namespace

Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::size_t t = 0, k = 0;
    bool have_header = false;
    std::uint64_t seed = 0;
    std::size_t iters = 0;
    CVec rows;
    std::size_t row_count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            if (line.find("design_seed=") != std::string::npos) {
                seed = meta_value(line, "design_seed");
                iters = meta_value(line, "design_iterations");
            }
            continue;
        }
        if (!have_header) {
            const auto v = parse_numbers(line, line_no, "header");
            if (v.size() != 2 || v[0] < 2 || v[1] < 1 || v[0] != std::floor(v[0]) ||
                v[1] != std::floor(v[1]))
                throw ParseError("header (line " + std::to_string(line_no) +
                                 "): expected 'T K' with T >= 2, K >= 1");
            t = static_cast<std::size_t>(v[0]);
            k = static_cast<std::size_t>(v[1]);
            rows.reserve(t * k);
            have_header = true;
            continue;
        }
        const std::string what = "row " + std::to_string(row_count);
        if (row_count >= k)
            throw ParseError(what + " (line " + std::to_string(line_no) + "): more than K=" +
                             std::to_string(k) + " rows");
        const auto v = parse_numbers(line, line_no, what);
        if (v.size() != 2 * t)
            throw ParseError(what + " (line " + std::to_string(line_no) + "): expected " +
                             std::to_string(2 * t) + " values, found " + std::to_string(v.size()));
        CVec entries(t);
        for (std::size_t n = 0; n < t; ++n) entries[n] = {v[2 * n], v[2 * n + 1]};
        try {
            Codeword check(entries);
        } catch (const ValidationError& e) {
            throw ValidationError(what + " (line " + std::to_string(line_no) + "): " + e.what());
        }
        rows.insert(rows.end(), entries.begin(), entries.end());
        ++row_count;
    }
    if (!have_header) throw ParseError("missing 'T K' header");
    if (row_count != k)
        throw ParseError("expected " + std::to_string(k) + " rows, found " +
                         std::to_string(row_count));
    return Codebook(t, k, std::move(rows), seed, iters);
}

}  // namespace lpd::grassmann

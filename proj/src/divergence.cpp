#include "lpd/divergence.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>

#include "lpd/error.hpp"
#include "lpd/kernels.hpp"
#include "lpd/parallel.hpp"

namespace lpd::divergence {
namespace {

constexpr std::size_t kQueryChunk = 1024;

// Points bucketed into square cells; each cell's points are contiguous.
class Grid2D {
public:
    Grid2D(const SampleCloud& c, std::size_t target_per_cell) {
        const std::size_t n = c.size();
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (std::size_t i = 0; i < n; ++i) {
            xmin = std::min(xmin, c.points[2 * i]);
            xmax = std::max(xmax, c.points[2 * i]);
            ymin = std::min(ymin, c.points[2 * i + 1]);
            ymax = std::max(ymax, c.points[2 * i + 1]);
        }
        const double w = std::max(xmax - xmin, 1e-300), h = std::max(ymax - ymin, 1e-300);
        const double cells = std::max(1.0, static_cast<double>(n) / static_cast<double>(target_per_cell));
        cell_ = std::sqrt(w * h / cells);
        if (!(cell_ > 0.0) || !std::isfinite(cell_)) cell_ = std::max(w, h);
        nx_ = std::clamp<std::size_t>(static_cast<std::size_t>(w / cell_) + 1, 1, 4096);
        ny_ = std::clamp<std::size_t>(static_cast<std::size_t>(h / cell_) + 1, 1, 4096);
        cell_ = std::max(w / static_cast<double>(nx_), h / static_cast<double>(ny_)) * (1.0 + 1e-12);
        x0_ = xmin;
        y0_ = ymin;

        std::vector<std::size_t> cell_of(n);
        start_.assign(nx_ * ny_ + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            cell_of[i] = index(cx(c.points[2 * i]), cy(c.points[2 * i + 1]));
            ++start_[cell_of[i] + 1];
        }
        for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
        xs_.resize(n);
        ys_.resize(n);
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t slot = fill[cell_of[i]]++;
            xs_[slot] = c.points[2 * i];
            ys_[slot] = c.points[2 * i + 1];
        }
    }

    // Squared distance to the k-th nearest stored point.
    double kth_sq_distance(double qx, double qy, std::size_t k, std::vector<double>& cand,
                           std::vector<double>& scratch) const {
        const auto& kt = kernels::active();
        const auto ci = static_cast<std::ptrdiff_t>(cx(qx));
        const auto cj = static_cast<std::ptrdiff_t>(cy(qy));
        const auto nx = static_cast<std::ptrdiff_t>(nx_), ny = static_cast<std::ptrdiff_t>(ny_);
        cand.clear();
        for (std::ptrdiff_t r = 0;; ++r) {
            auto visit = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
                if (i < 0 || j < 0 || i >= nx || j >= ny) return;
                const std::size_t c = index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                const std::size_t a = start_[c], b = start_[c + 1];
                if (a == b) return;
                scratch.resize(b - a);
                kt.sq_dist_2d(qx, qy, xs_.data() + a, ys_.data() + a, b - a, scratch.data());
                cand.insert(cand.end(), scratch.begin(), scratch.end());
            };
            if (r == 0) {
                visit(ci, cj);
            } else {
                for (std::ptrdiff_t i = ci - r; i <= ci + r; ++i) {
                    visit(i, cj - r);
                    visit(i, cj + r);
                }
                for (std::ptrdiff_t j = cj - r + 1; j <= cj + r - 1; ++j) {
                    visit(ci - r, j);
                    visit(ci + r, j);
                }
            }
            const bool covered = ci - r <= 0 && cj - r <= 0 && ci + r >= nx - 1 && cj + r >= ny - 1;
            if (cand.size() >= k) {
                std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1),
                                 cand.end());
                cand.resize(k);
                const double kth = *std::max_element(cand.begin(), cand.end());
                if (covered) return kth;
                // Unvisited points lie outside the (2r+1)^2 box around cell (ci, cj).
                const double inf = std::numeric_limits<double>::infinity();
                const double left = ci - r > 0 ? qx - (x0_ + static_cast<double>(ci - r) * cell_) : inf;
                const double right = ci + r < nx - 1 ? x0_ + static_cast<double>(ci + r + 1) * cell_ - qx : inf;
                const double down = cj - r > 0 ? qy - (y0_ + static_cast<double>(cj - r) * cell_) : inf;
                const double up = cj + r < ny - 1 ? y0_ + static_cast<double>(cj + r + 1) * cell_ - qy : inf;
                const double bound = std::min({left, right, down, up});
                if (bound > 0.0 && kth <= bound * bound) return kth;
            } else if (covered) {
                throw ValidationError("kl_knn: fewer stored points than k");
            }
        }
    }

private:
    std::size_t cx(double x) const {
        const double f = std::floor((x - x0_) / cell_);
        return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(nx_ - 1)));
    }
    std::size_t cy(double y) const {
        const double f = std::floor((y - y0_) / cell_);
        return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(ny_ - 1)));
    }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }

    double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
    std::size_t nx_ = 1, ny_ = 1;
    std::vector<std::size_t> start_;
    RVec xs_, ys_;
};

double brute_kth_sq(const SampleCloud& c, const double* q, std::size_t k, std::vector<double>& d2) {
    const std::size_t n = c.size(), dim = c.dim;
    d2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            const double diff = c.points[i * dim + a] - q[a];
            acc += diff * diff;
        }
        d2[i] = acc;
    }
    std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(k - 1), d2.end());
    return d2[k - 1];
}

}  // namespace

SampleCloud cloud_from_complex(std::span<const cplx> z, std::string label) {
    SampleCloud c;
    c.dim = 2;
    c.label = std::move(label);
    c.points.resize(2 * z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        c.points[2 * i] = z[i].real();
        c.points[2 * i + 1] = z[i].imag();
    }
    return c;
}

std::size_t default_k(std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n)))));
}

KlEstimate kl_knn(const SampleCloud& p, const SampleCloud& q, std::size_t k, std::size_t threads) {
    if (p.dim != q.dim || p.dim == 0) throw DimensionError("kl_knn: clouds have different dimensions");
    if (p.points.size() % p.dim || q.points.size() % q.dim)
        throw DimensionError("kl_knn: point storage is not a whole number of points");
    const std::size_t n = p.size(), m = q.size();
    if (k < 1) throw ValidationError("kl_knn: k must be at least 1");
    if (n < k + 1 || m < k + 1) throw ValidationError("kl_knn: need n, m >= k + 1");

    const bool planar = p.dim == 2;
    const std::size_t per_cell = std::max<std::size_t>(4, k / 2);
    std::optional<Grid2D> gp, gq;
    if (planar) {
        gp.emplace(p, per_cell);
        gq.emplace(q, per_cell);
    }
    const std::size_t chunks = (n + kQueryChunk - 1) / kQueryChunk;
    std::vector<double> partial(chunks, 0.0);
    std::vector<char> jitter(chunks, 0);
    parallel_for(chunks, threads, [&](std::size_t c) {
        std::vector<double> cand, scratch;
        const std::size_t lo = c * kQueryChunk, hi = std::min(n, lo + kQueryChunk);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double* x = p.points.data() + i * p.dim;
            double rho2, nu2;
            if (planar) {
                rho2 = gp->kth_sq_distance(x[0], x[1], k + 1, cand, scratch);
                nu2 = gq->kth_sq_distance(x[0], x[1], k, cand, scratch);
            } else {
                rho2 = brute_kth_sq(p, x, k + 1, scratch);
                nu2 = brute_kth_sq(q, x, k, scratch);
            }
            double scale = 1.0;
            for (std::size_t a = 0; a < p.dim; ++a) scale = std::max(scale, std::abs(x[a]));
            const double floor = DBL_EPSILON * scale;
            double rho = std::sqrt(rho2), nu = std::sqrt(nu2);
            if (rho < floor || nu < floor) {
                jitter[c] = 1;
                rho = std::max(rho, floor);
                nu = std::max(nu, floor);
            }
            acc += std::log(nu / rho);
        }
        partial[c] = acc;
    });
    double total = 0.0;
    for (double v : partial) total += v;
    KlEstimate est;
    est.n = n;
    est.m = m;
    est.k = k;
    est.jittered = std::any_of(jitter.begin(), jitter.end(), [](char f) { return f != 0; });
    est.nats = static_cast<double>(p.dim) / static_cast<double>(n) * total +
               std::log(static_cast<double>(m) / static_cast<double>(n - 1));
    return est;
}

SampleCloud constellation_sample_cloud(const grassmann::Codebook& cb, std::size_t n, bool rotate,
                                       Rng& rng) {
    if (n < 1) throw ValidationError("sample cloud needs n >= 1");
    const std::size_t T = cb.T();
    const double scale = std::sqrt(static_cast<double>(T));
    CVec z;
    z.reserve(n + T);
    while (z.size() < n) {
        const auto row = cb.row(rng.below(cb.K()));
        const cplx r = rotate ? std::polar(scale, rng.uniform_phase()) : cplx{scale, 0.0};
        for (std::size_t t = 0; t < T; ++t) z.push_back(row[t] * r);
    }
    z.resize(n);
    return cloud_from_complex(z, rotate ? "rotated" : "unrotated");
}

SampleCloud gaussian_cloud(std::size_t n, Rng& rng) {
    CVec z(n);
    for (auto& v : z) v = rng.complex_normal(1.0);
    return cloud_from_complex(z, "noise");
}

KlSweepResult kl_sweep(const KlSweepParams& params) {
    KlSweepResult out;
    const std::size_t k = params.k ? params.k : default_k(params.n);
    for (double eta : params.eta_list) {
        for (std::size_t T : params.T_list) {
            const double bits = eta * static_cast<double>(T);
            const double rounded = std::round(bits);
            char label[96];
            std::snprintf(label, sizeof label, "T=%zu eta=%g", T, eta);
            if (T < 2 || std::abs(bits - rounded) > 1e-9 || rounded < 1.0 || rounded > 24.0) {
                out.warnings.push_back(std::string(label) + ": K = 2^(eta T) is not an integer >= 2; skipped");
                continue;
            }
            const auto K = std::size_t{1} << static_cast<unsigned>(rounded);
            const std::size_t iters =
                K > params.large_k ? params.large_k_iterations : params.design_iterations;
            const auto cb = grassmann::design_codebook(T, K, iters, derive_seed(params.seed, {T, K}));
            Rng sig(derive_seed(params.seed, {T, K, 1}));
            Rng noise(derive_seed(params.seed, {T, K, 2}));
            const SampleCloud p = constellation_sample_cloud(cb, params.n, true, sig);
            const SampleCloud q = gaussian_cloud(params.n, noise);
            const KlEstimate est = kl_knn(p, q, k, params.threads);
            out.rows.push_back({T, eta, K, est.nats, params.n, k, params.seed});
        }
    }
    return out;
}

void write_kl_csv(std::ostream& out, const std::vector<KlRow>& rows) {
    out << kKlCsvHeader << "\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.6g,%zu,%.10g,%zu,%zu,%llu\n", r.T, r.eta, r.K,
                      r.kl_nats, r.n, r.k, static_cast<unsigned long long>(r.seed));
        out << buf;
    }
}

}  // namespace lpd::divergence

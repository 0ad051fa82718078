#include "lpd/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lpd/channel.hpp"
#include "lpd/grassmann.hpp"
#include "lpd/modem.hpp"
#include "lpd/receivers.hpp"
#include "lpd/rng.hpp"
#include "lpd/warden.hpp"

namespace lpd::checks {
namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const CurvePoint* find_point(const std::vector<CurvePoint>& pts, const std::string& series,
                             const std::string& metric, double x, double tol = 0.05) {
    for (const auto& p : pts)
        if (p.series == series && p.metric == metric && std::abs(p.x - x) <= tol) return &p;
    return nullptr;
}

}  // namespace

std::string format(const CheckResult& r) {
    return std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name +
           ": " + r.detail;
}

const std::vector<KlTarget>& kl_targets() {
    static const std::vector<KlTarget> t{{2, 0.4845}, {4, 0.0908}, {6, 0.0312}, {8, 0.0192}};
    return t;
}

const std::vector<BerTarget>& ber_targets() {
    static const std::vector<BerTarget> t{{"nc", -13.13, 0.0497},
                                          {"nc", -5.13, 0.00928},
                                          {"nc", 4.98, 0.000536},
                                          {"qpsk", -5.13, 0.00798}};
    return t;
}

CheckResult check_kl_trend(const std::vector<divergence::KlRow>& rows) {
    CheckResult r{1, "KL trend, eta = 1.5", true, ""};
    double prev = INFINITY;
    std::ostringstream d;
    for (const auto& t : kl_targets()) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const divergence::KlRow& row) {
            return row.T == t.T && std::abs(row.eta - 1.5) < 1e-9;
        });
        if (it == rows.end()) {
            r.pass = false;
            d << "T=" << t.T << " missing; ";
            continue;
        }
        const double rel = (it->kl_nats - t.kl) / t.kl;
        const bool ok = std::abs(rel) <= 0.25 && it->kl_nats < prev;
        r.pass = r.pass && ok;
        d << "T=" << t.T << " " << fmt("%.4f", it->kl_nats) << " (target " << t.kl << ", "
          << fmt("%+.0f%%", 100.0 * rel) << (ok ? "" : " !") << ") ";
        prev = it->kl_nats;
    }
    if (!rows.empty()) d << "k=" << rows.front().k << " n=" << rows.front().n;
    r.detail = d.str();
    return r;
}

CheckResult check_ber_curve(const std::vector<CurvePoint>& points) {
    CheckResult r{2, "BER within factor 2", true, ""};
    std::ostringstream d;
    for (const auto& t : ber_targets()) {
        const auto* p = find_point(points, t.series, "ber", t.x);
        if (!p) {
            r.pass = false;
            d << t.series << "@" << t.x << " missing; ";
            continue;
        }
        const double ratio = p->value / t.ber;
        const bool ok = ratio >= 0.5 && ratio <= 2.0;
        r.pass = r.pass && ok;
        d << t.series << "@" << t.x << " " << fmt("%.3g", p->value) << " (target " << t.ber
          << ", x" << fmt("%.2f", ratio) << (ok ? "" : " !") << ") ";
    }
    r.detail = d.str();
    return r;
}

CheckResult check_pfa(const std::vector<CurvePoint>& points) {
    CheckResult r{3, "Pfa calibration", true, ""};
    double lo = 1.0, hi = 0.0;
    std::size_t count = 0;
    for (const auto& p : points) {
        if (p.metric != "pfa") continue;
        ++count;
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
        if (p.value < 0.035 || p.value > 0.065) r.pass = false;
    }
    if (count == 0) r.pass = false;
    r.detail = std::to_string(count) + " noise points, Pfa range [" + fmt("%.4f", lo) + ", " +
               fmt("%.4f", hi) + "] (band [0.035, 0.065])";
    return r;
}

CheckResult check_covertness(const std::vector<CurvePoint>& points) {
    CheckResult r{4, "covertness ordering", true, ""};
    std::ostringstream d;
    const auto* nc = find_point(points, "nc", "pd", 4.92);
    const auto* qpsk = find_point(points, "qpsk", "pd", 4.92);
    const auto* qam = find_point(points, "qam64", "pd", 4.92);
    if (!nc || !qpsk || !qam) {
        r.pass = false;
        r.detail = "missing +4.92 dB points";
        return r;
    }
    const bool order = nc->value < qam->value && qam->value <= qpsk->value;
    const bool nc_band = nc->value >= 0.45 && nc->value <= 0.75;
    const bool qpsk_band = qpsk->value >= 0.85 && qpsk->value <= 0.98;
    d << "@4.92 nc " << fmt("%.3f", nc->value) << (nc_band ? "" : " (outside [0.45, 0.75])")
      << ", qam64 " << fmt("%.3f", qam->value) << ", qpsk " << fmt("%.3f", qpsk->value)
      << (qpsk_band ? "" : " (outside [0.85, 0.98])") << (order ? "" : ", order violated");
    bool floor_ok = true;
    double lo = 1.0, hi = 0.0;
    for (const auto& p : points) {
        if (p.metric != "pd" || p.x >= -15.0) continue;
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
        if (p.value < 0.03 || p.value > 0.08) floor_ok = false;
    }
    d << "; Pd below -15 dB in [" << fmt("%.3f", lo) << ", " << fmt("%.3f", hi) << "]"
      << (floor_ok ? "" : " (outside [0.03, 0.08])");
    r.pass = order && nc_band && qpsk_band && floor_ok;
    r.detail = d.str();
    return r;
}

CheckResult check_constellation(std::uint64_t design_seed, std::size_t iterations) {
    CheckResult r{5, "constellation quality", true, ""};
    const auto designed = grassmann::design_codebook(4, 64, iterations, design_seed);
    double best_random = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s)
        best_random = std::max(best_random, grassmann::random_codebook(4, 64, s).min_chordal_distance());
    const auto pair = grassmann::design_codebook(2, 2, iterations, design_seed);
    const bool a = designed.min_chordal_distance() > best_random;
    const bool b = pair.min_chordal_distance() >= 0.999;
    r.pass = a && b;
    r.detail = "T=4 K=64 designed " + fmt("%.4f", designed.min_chordal_distance()) +
               " vs best random (seeds 1-20) " + fmt("%.4f", best_random) + "; T=2 K=2 " +
               fmt("%.6f", pair.min_chordal_distance());
    return r;
}

CheckResult check_exactness(std::uint64_t seed) {
    CheckResult r{6, "exactness suite", true, ""};
    std::ostringstream d;
    Rng rng(seed);
    const auto pn = modem::generate_pn();
    const auto cb = grassmann::design_codebook(4, 64, 200, seed);

    std::size_t errors = 0;
    for (std::size_t k = 0; k < cb.K(); ++k) {
        for (int ph = 0; ph < 16; ++ph) {
            const auto bits = modem::index_to_bits(k, cb.bits_per_codeword());
            const auto x = modem::rotate(modem::map_bits(bits, cb), rng.uniform_phase());
            const auto chips = modem::spread(x.entries(), pn, cb.T());
            const auto y = modem::despread(chips, pn);
            if (modem::demap(receivers::noncoherent_ml_detect(y, cb), cb) != bits) ++errors;
        }
    }
    const bool round_trip = errors == 0;
    d << "round trip errors " << errors << "/1024";

    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        CVec y(cb.T());
        for (auto& v : y) v = rng.complex_normal();
        cplx c = rng.complex_normal();
        if (c == cplx{}) c = 1.0;
        c *= std::polar(1.0, rng.uniform_phase());
        CVec z(y);
        for (auto& v : z) v *= c;
        if (receivers::noncoherent_ml_detect(y, cb) != receivers::noncoherent_ml_detect(z, cb))
            ++mismatches;
    }
    const bool invariance = mismatches == 0;
    d << "; argmax invariance mismatches " << mismatches << "/1000";

    bool autocorr = true;
    for (std::size_t lag = 1; lag < modem::kChipsPerSymbol; ++lag)
        autocorr = autocorr && modem::pn_autocorrelation(pn, lag) * 31.0 == -1.0;
    d << "; off-peak autocorrelation " << (autocorr ? "-1/31 at every lag" : "WRONG");

    const double sample[] = {-1.0, -1.0, 1.0, 1.0};
    const double jb = warden::jarque_bera_statistic(sample);
    const bool jb_ok = std::abs(jb - 2.0 / 3.0) <= 1e-15;
    d << "; JB(-1,-1,1,1) = " << fmt("%.17g", jb);

    CVec s(400);
    for (auto& v : s) v = rng.complex_normal();
    const auto back = modem::despread(modem::spread(s, pn, 4), pn);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(back[i] - s[i]));
    const bool spread_ok = worst <= 1e-12;
    d << "; despread(spread) max error " << fmt("%.3g", worst);

    r.pass = round_trip && invariance && autocorr && jb_ok && spread_ok;
    r.detail = d.str();
    return r;
}

CheckResult check_determinism(const ExperimentConfig& base, std::size_t threads) {
    CheckResult r{7, "determinism across thread counts", true, ""};
    ExperimentConfig cfg = base;
    cfg.ber_snr_grid_db = {-10.0, 0.0};
    cfg.ber_trials = 24;
    cfg.blocks_per_trial = 10;
    cfg.detect_snr_grid_db = {-5.0, 5.0};
    cfg.detect_trials = 24;
    cfg.warden_sample_count = 5000;
    cfg.calibration_trials = 1000;
    cfg.design_iterations = 100;
    const auto cb = experiment_codebook(cfg);
    auto run = [&](std::size_t nthreads) {
        std::ostringstream ber, det;
        write_curve_csv(ber, cfg, run_ber_curve(cfg, cb, nthreads));
        write_curve_csv(det, cfg,
                        run_detection_curve(cfg, cb, experiment_threshold(cfg, nthreads), nthreads));
        return std::make_pair(ber.str(), det.str());
    };
    const auto one = run(1);
    const auto many = run(threads);
    const bool ber_same = one.first == many.first;
    const bool det_same = one.second == many.second;
    r.pass = ber_same && det_same;
    r.detail = "ber CSV " + std::string(ber_same ? "identical" : "DIFFERS") + ", detect CSV " +
               (det_same ? "identical" : "DIFFERS") + " (1 vs " + std::to_string(threads) +
               " threads, " + std::to_string(one.first.size() + one.second.size()) + " bytes)";
    return r;
}

}  // namespace lpd::checks

#include "lpd/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "lpd/channel.hpp"
#include "lpd/error.hpp"
#include "lpd/parallel.hpp"
#include "lpd/receivers.hpp"
#include "lpd/rng.hpp"

namespace lpd {
namespace {

constexpr std::uint64_t kBerStream = 1;
constexpr std::uint64_t kDetectStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kCalibrationStream = 4;
constexpr std::uint64_t kSchemeOffset = 100;

std::uint64_t scheme_tag(modem::Scheme s) { return kSchemeOffset + static_cast<std::uint64_t>(s); }

CurvePoint make_point(std::string series, std::string metric, double x, std::uint64_t trials,
                      std::uint64_t events, std::uint64_t samples) {
    CurvePoint p;
    p.series = std::move(series);
    p.metric = std::move(metric);
    p.x = x;
    p.trials = trials;
    p.events = events;
    p.samples = samples;
    p.value = samples ? static_cast<double>(events) / static_cast<double>(samples) : 0.0;
    p.ci95_halfwidth = ci95_halfwidth(p.value, samples);
    return p;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

double ci95_halfwidth(double p, std::uint64_t samples) {
    if (samples == 0) return 0.0;
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
}

grassmann::Codebook experiment_codebook(const ExperimentConfig& cfg) {
    if (!cfg.codebook_path.empty()) {
        auto cb = grassmann::load_codebook(cfg.codebook_path);
        if (cb.T() != cfg.T || cb.K() != cfg.K)
            throw ConfigError("grassmann.codebook_path: file holds T=" + std::to_string(cb.T()) +
                              " K=" + std::to_string(cb.K()) + ", config asks for T=" +
                              std::to_string(cfg.T) + " K=" + std::to_string(cfg.K));
        return cb;
    }
    return grassmann::design_codebook(cfg.T, cfg.K, cfg.design_iterations, cfg.design_seed,
                                      cfg.design_params());
}

std::vector<CurvePoint> run_ber_curve(const ExperimentConfig& cfg, const grassmann::Codebook& cb,
                                      std::size_t threads) {
    validate(cfg);
    const auto pn = modem::generate_pn(cfg.pn_taps, cfg.pn_state);
    const auto budget = cfg.link_budget();
    const auto shape = cfg.pulse();
    const std::size_t npts = cfg.ber_snr_grid_db.size();
    const std::size_t nsch = cfg.ber_schemes.size();
    const std::size_t ntr = cfg.ber_trials;
    std::vector<modem::FrameSpec> frames;
    for (auto s : cfg.ber_schemes) frames.push_back(modem::make_frame_spec(s, cfg.T));

    std::vector<receivers::BerRecord> records(npts * nsch * ntr);
    parallel_for(npts * ntr, threads, [&](std::size_t job) {
        const std::size_t p = job / ntr, t = job % ntr;
        const double x = cfg.ber_snr_grid_db[p];
        const double sigma2 = cfg.noiseless ? 0.0 : budget.bob_noise_variance(x);
        const std::uint64_t channel_seed = derive_seed(cfg.master_seed, {kBerStream, p, t});
        for (std::size_t s = 0; s < nsch; ++s) {
            Rng ch(channel_seed);
            Rng data(derive_seed(cfg.master_seed, {kBerStream, p, t, scheme_tag(cfg.ber_schemes[s])}));
            receivers::BerRecord acc;
            for (std::size_t b = 0; b < cfg.blocks_per_trial; ++b) {
                const receivers::BlockChannel link{ch.complex_normal(1.0), sigma2};
                acc += receivers::run_block(frames[s], &cb, pn, link, data, ch, shape);
            }
            records[(p * nsch + s) * ntr + t] = acc;
        }
    });

    std::vector<CurvePoint> out;
    for (std::size_t s = 0; s < nsch; ++s) {
        for (std::size_t p = 0; p < npts; ++p) {
            receivers::BerRecord sum;
            for (std::size_t t = 0; t < ntr; ++t) sum += records[(p * nsch + s) * ntr + t];
            out.push_back(make_point(std::string(modem::scheme_name(cfg.ber_schemes[s])), "ber",
                                     cfg.ber_snr_grid_db[p], ntr, sum.bit_errors, sum.bits_sent));
        }
    }
    return out;
}

CVec willie_window(const ExperimentConfig& cfg, const grassmann::Codebook& cb,
                   std::optional<modem::Scheme> scheme, double axis_db, std::uint64_t channel_seed,
                   std::uint64_t data_seed) {
    const std::size_t n = cfg.warden_sample_count;
    const double sigma2 = cfg.link_budget().willie_noise_variance(axis_db);
    Rng ch(channel_seed);
    if (!scheme) {
        CVec z(n);
        for (auto& v : z) v = ch.complex_normal(sigma2);
        return z;
    }
    const auto pn = modem::generate_pn(cfg.pn_taps, cfg.pn_state);
    const auto shape = cfg.pulse();
    const auto frame = modem::make_frame_spec(*scheme, cfg.T);
    const std::size_t chips_per_block = cfg.T * modem::kChipsPerSymbol;
    const std::size_t nblocks = (n + chips_per_block - 1) / chips_per_block;
    Rng data(data_seed);
    CVec symbols;
    symbols.reserve(nblocks * cfg.T);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const auto blk = receivers::build_block(frame, &cb, data);
        symbols.insert(symbols.end(), blk.symbols.begin(), blk.symbols.end());
    }
    const auto tx = modem::pulse_shape(modem::spread(symbols, pn, cfg.T), shape);
    auto faded = channel::apply_block_fading(tx, ch, 0.0, cfg.willie_fading);
    channel::apply_cfo(faded.rx.samples, cfg.cfo / static_cast<double>(shape.samples_per_chip));
    channel::add_awgn(faded.rx.samples, sigma2, ch);
    auto rx = modem::matched_filter(faded.rx, shape);
    rx.samples.resize(n);
    return std::move(rx.samples);
}

warden::CalibratedThreshold experiment_threshold(const ExperimentConfig& cfg, std::size_t threads) {
    if (!cfg.threshold_path.empty() && std::filesystem::exists(cfg.threshold_path)) {
        auto t = warden::load_threshold(cfg.threshold_path);
        if (t.test_name == cfg.warden_test && t.sample_count == cfg.warden_sample_count &&
            t.target_pfa == cfg.target_pfa)
            return t;
    }
    const auto test = warden::make_test(cfg.warden_test);
    return warden::calibrate_threshold(*test, cfg.warden_sample_count, cfg.target_pfa,
                                       cfg.calibration_trials,
                                       derive_seed(cfg.master_seed, {kCalibrationStream}),
                                       threads);
}

std::vector<CurvePoint> run_detection_curve(const ExperimentConfig& cfg,
                                            const grassmann::Codebook& cb,
                                            const warden::CalibratedThreshold& threshold,
                                            std::size_t threads) {
    validate(cfg);
    if (threshold.sample_count != cfg.warden_sample_count)
        throw ConfigError("detect.warden_sample_count: threshold was calibrated for " +
                          std::to_string(threshold.sample_count) + " samples");
    const auto test = warden::make_test(cfg.warden_test);
    const std::size_t npts = cfg.detect_snr_grid_db.size();
    const std::size_t nsch = cfg.detect_schemes.size();
    const std::size_t ntr = cfg.detect_trials;
    // Slot nsch holds the noise-only decision.
    std::vector<char> d1(npts * (nsch + 1) * ntr, 0);
    parallel_for(npts * ntr, threads, [&](std::size_t job) {
        const std::size_t p = job / ntr, t = job % ntr;
        const double x = cfg.detect_snr_grid_db[p];
        const std::uint64_t channel_seed = derive_seed(cfg.master_seed, {kDetectStream, p, t});
        for (std::size_t s = 0; s <= nsch; ++s) {
            CVec w;
            if (s < nsch) {
                const auto scheme = cfg.detect_schemes[s];
                w = willie_window(cfg, cb, scheme, x, channel_seed,
                                  derive_seed(cfg.master_seed, {kDetectStream, p, t, scheme_tag(scheme)}));
            } else {
                w = willie_window(cfg, cb, std::nullopt, x,
                                  derive_seed(cfg.master_seed, {kNoiseStream, p, t}), 0);
            }
            const auto outcome = warden::detect_frame(w, threshold, *test);
            d1[(p * (nsch + 1) + s) * ntr + t] = outcome.decision == warden::Decision::D1;
        }
    });

    std::vector<CurvePoint> out;
    for (std::size_t s = 0; s <= nsch; ++s) {
        const std::string series = s < nsch ? std::string(modem::scheme_name(cfg.detect_schemes[s])) : "noise";
        const std::string metric = s < nsch ? "pd" : "pfa";
        for (std::size_t p = 0; p < npts; ++p) {
            std::uint64_t events = 0;
            for (std::size_t t = 0; t < ntr; ++t) events += d1[(p * (nsch + 1) + s) * ntr + t];
            out.push_back(make_point(series, metric, cfg.detect_snr_grid_db[p], ntr, events, ntr));
        }
    }
    return out;
}

divergence::KlSweepResult run_kl_sweep(const ExperimentConfig& cfg, std::size_t threads) {
    validate(cfg);
    divergence::KlSweepParams p;
    p.T_list = cfg.kl_T;
    p.eta_list = cfg.kl_eta;
    p.n = cfg.kl_samples;
    p.k = cfg.kl_k;
    p.seed = cfg.master_seed;
    p.design_iterations = cfg.kl_design_iterations;
    p.large_k = cfg.kl_large_k;
    p.large_k_iterations = cfg.kl_large_k_iterations;
    p.threads = threads;
    return divergence::kl_sweep(p);
}

std::string config_comment(const ExperimentConfig& cfg) {
    std::istringstream in(to_string(cfg));
    std::string line, out;
    while (std::getline(in, line)) out += line.empty() ? "#\n" : "# " + line + "\n";
    return out;
}

void write_curve_csv(std::ostream& out, const ExperimentConfig& cfg,
                     const std::vector<CurvePoint>& points) {
    out << config_comment(cfg) << kCurveCsvHeader << "\n";
    for (const auto& p : points)
        out << p.series << "," << p.metric << "," << fmt(p.x) << "," << fmt(p.value) << ","
            << fmt(p.ci95_halfwidth) << "," << p.trials << "," << p.events << "," << p.samples
            << "\n";
}

std::vector<std::filesystem::path> emit_plot_data(const std::vector<CurvePoint>& points,
                                                  const std::filesystem::path& dir,
                                                  const std::string& stem,
                                                  const std::string& header) {
    if (points.empty()) throw ValidationError("emit_plot_data: no points");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::map<std::pair<std::string, std::string>, std::vector<const CurvePoint*>> groups;
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& p : points) {
        auto key = std::make_pair(p.series, p.metric);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&p);
    }
    std::vector<std::filesystem::path> written;
    bool log_y = false;
    std::string plot;
    for (const auto& key : order) {
        const auto name = stem + "_" + key.first + "_" + key.second + ".csv";
        const auto path = dir / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        f << header << "x,value,ci95\n";
        for (const auto* p : groups[key])
            f << fmt(p->x) << "," << fmt(p->value) << "," << fmt(p->ci95_halfwidth) << "\n";
        if (!f) throw Error("failed writing " + path.string());
        written.push_back(path);
        log_y = log_y || key.second == "ber";
        plot += std::string(plot.empty() ? "plot " : ", \\\n     ") + "'" + name +
                "' using 1:2:3 with yerrorlines title '" + key.first + " " + key.second + "'";
    }
    const auto gp = dir / (stem + ".gp");
    std::ofstream g(gp, std::ios::binary);
    if (!g) throw Error("cannot write " + gp.string());
    g << "set datafile separator ','\n"
      << "set xlabel 'SNR (dB)'\n"
      << "set grid\n";
    if (log_y) g << "set logscale y\n";
    g << plot << "\n";
    if (!g) throw Error("failed writing " + gp.string());
    written.push_back(gp);
    return written;
}

}  // namespace lpd

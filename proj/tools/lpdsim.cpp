// lpdsim: codebook design, BER / detection / KL sweeps and threshold calibration.
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error, 3 a --check failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lpd/checks.hpp"
#include "lpd/config.hpp"
#include "lpd/error.hpp"
#include "lpd/experiment.hpp"
#include "lpd/warden.hpp"

namespace fs = std::filesystem;
using namespace lpd;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string preset = "desk";
    bool check = false;
    std::size_t threads = 0;
};

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config_path, "Experiment config file");
    sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
    sub->add_option("--preset", o.preset, "Base preset: desk or paper")->capture_default_str();
    sub->add_flag("--check", o.check, "Compare results with the reference values");
    sub->add_option("--threads", o.threads, "Worker threads, 0 for all (results do not change)");
}

ExperimentConfig resolve(const CommonOptions& o) {
    ExperimentConfig cfg = preset(o.preset);
    if (!o.config_path.empty()) cfg = load_config(o.config_path, cfg);
    if (o.seed) cfg.master_seed = *o.seed;
    if (!o.out.empty()) cfg.output_dir = o.out;
    validate(cfg);
    return cfg;
}

fs::path output_dir(const ExperimentConfig& cfg) {
    fs::path dir = cfg.output_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    return f;
}

int report(const std::vector<checks::CheckResult>& results) {
    bool ok = true;
    for (const auto& r : results) {
        std::cout << checks::format(r) << "\n";
        ok = ok && r.pass;
    }
    return ok ? 0 : kExitCheck;
}

int run_design(const CommonOptions& o, std::optional<std::size_t> t, std::optional<std::size_t> k,
               std::optional<std::size_t> iters) {
    ExperimentConfig cfg = resolve(o);
    if (t) cfg.T = *t;
    if (k) cfg.K = *k;
    if (iters) cfg.design_iterations = *iters;
    if (o.seed) cfg.design_seed = *o.seed;
    // Only the grassmann section matters here; scheme lists may not fit a small T.
    cfg.ber_schemes.clear();
    cfg.detect_schemes.clear();
    validate(cfg);
    const auto cb = grassmann::design_codebook(cfg.T, cfg.K, cfg.design_iterations,
                                               cfg.design_seed, cfg.design_params());
    const fs::path path = output_dir(cfg) / ("codebook_T" + std::to_string(cfg.T) + "_K" +
                                             std::to_string(cfg.K) + ".txt");
    grassmann::save_codebook(cb, path);
    std::printf("T=%zu K=%zu eta=%.4g min_chordal_distance=%.6f -> %s\n", cb.T(), cb.K(),
                cb.spectral_efficiency(), cb.min_chordal_distance(), path.c_str());
    if (!o.check) return 0;
    return report({checks::check_constellation(cfg.design_seed, cfg.design_iterations)});
}

int run_ber(const CommonOptions& o) {
    const ExperimentConfig cfg = resolve(o);
    const auto cb = experiment_codebook(cfg);
    const auto points = run_ber_curve(cfg, cb, o.threads);
    const fs::path dir = output_dir(cfg);
    auto f = open_out(dir / "ber.csv");
    write_curve_csv(f, cfg, points);
    emit_plot_data(points, dir, "ber", config_comment(cfg));
    for (const auto& p : points)
        std::printf("%-6s x=%7.2f ber=%.4g +/- %.2g\n", p.series.c_str(), p.x, p.value,
                    p.ci95_halfwidth);
    if (!o.check) return 0;
    return report({checks::check_ber_curve(points)});
}

fs::path threshold_file(const fs::path& dir, const ExperimentConfig& cfg) {
    char name[128];
    std::snprintf(name, sizeof name, "threshold_%s_n%zu_pfa%g.txt", cfg.warden_test.c_str(),
                  cfg.warden_sample_count, cfg.target_pfa);
    return dir / name;
}

int run_detect(const CommonOptions& o) {
    const ExperimentConfig cfg = resolve(o);
    const auto cb = experiment_codebook(cfg);
    const fs::path dir = output_dir(cfg);
    const auto threshold = experiment_threshold(cfg, o.threads);
    warden::save_threshold(threshold, threshold_file(dir, cfg));
    const auto points = run_detection_curve(cfg, cb, threshold, o.threads);
    auto f = open_out(dir / "detect.csv");
    write_curve_csv(f, cfg, points);
    emit_plot_data(points, dir, "detect", config_comment(cfg));
    std::printf("threshold %.4f (%s, n=%zu, pfa=%g)\n", threshold.threshold,
                threshold.test_name.c_str(), threshold.sample_count, threshold.target_pfa);
    for (const auto& p : points)
        std::printf("%-6s %-3s x=%7.2f %.4f +/- %.3f\n", p.series.c_str(), p.metric.c_str(), p.x,
                    p.value, p.ci95_halfwidth);
    if (!o.check) return 0;
    return report({checks::check_pfa(points), checks::check_covertness(points)});
}

int run_kl(const CommonOptions& o) {
    const ExperimentConfig cfg = resolve(o);
    const auto result = run_kl_sweep(cfg, o.threads);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    const fs::path dir = output_dir(cfg);
    auto f = open_out(dir / "kl.csv");
    f << config_comment(cfg);
    divergence::write_kl_csv(f, result.rows);
    divergence::write_kl_csv(std::cout, result.rows);
    if (!o.check) return 0;
    return report({checks::check_kl_trend(result.rows)});
}

int run_calibrate(const CommonOptions& o) {
    const ExperimentConfig cfg = resolve(o);
    const auto test = warden::make_test(cfg.warden_test);
    const auto t = warden::calibrate_threshold(*test, cfg.warden_sample_count, cfg.target_pfa,
                                               cfg.calibration_trials,
                                               derive_seed(cfg.master_seed, {4}), o.threads);
    const fs::path path = threshold_file(output_dir(cfg), cfg);
    warden::save_threshold(t, path);
    const double anchor = warden::jarque_bera_asymptotic_threshold(cfg.target_pfa);
    std::printf("threshold %.4f (asymptotic %.4f) -> %s\n", t.threshold, anchor, path.c_str());
    if (!o.check) return 0;
    checks::CheckResult r{0, "calibrated threshold near the asymptotic value",
                          std::abs(t.threshold - anchor) <= 0.25 * anchor, ""};
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4f vs %.4f (tolerance 25%%)", t.threshold, anchor);
    r.detail = buf;
    return report({r});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-probability-of-detection link simulator"};
    app.require_subcommand(1);

    CommonOptions design_opts, ber_opts, detect_opts, kl_opts, calib_opts;
    std::optional<std::size_t> t, k, iters;

    auto* design = app.add_subcommand("design", "Design a Grassmannian codebook");
    add_common(design, design_opts);
    design->add_option("--t", t, "Coherence block length T");
    design->add_option("--k", k, "Codebook size K");
    design->add_option("--iters", iters, "Ascent iterations");

    auto* ber = app.add_subcommand("ber", "BER versus SNR for every scheme");
    add_common(ber, ber_opts);
    auto* detect = app.add_subcommand("detect", "Warden detection probability versus SNR");
    add_common(detect, detect_opts);
    auto* kl = app.add_subcommand("kl", "KL divergence sweep over T and eta");
    add_common(kl, kl_opts);
    auto* calib = app.add_subcommand("calibrate", "Calibrate the warden threshold");
    add_common(calib, calib_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (design->parsed()) return run_design(design_opts, t, k, iters);
        if (ber->parsed()) return run_ber(ber_opts);
        if (detect->parsed()) return run_detect(detect_opts);
        if (kl->parsed()) return run_kl(kl_opts);
        if (calib->parsed()) return run_calibrate(calib_opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}

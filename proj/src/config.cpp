#include "lpd/config.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lpd/error.hpp"

namespace lpd {
namespace {

// Axis points of the reference BER and detection sweeps.
const RVec kBerGrid{-25.05, -23.11, -21.02, -19.12, -17.02, -15.04, -13.13, -11.06,
                    -9.05,  -7.16,  -5.13,  -2.96,  -1.10,  0.95,   2.96,   4.98};
const RVec kDetectGrid{-22.94, -20.99, -19.01, -16.83, -14.84, -12.90, -11.00, -9.00,
                       -6.94,  -5.01,  -2.90,  -0.91,  1.00,   3.00,   4.92,   7.12};

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct FieldError {
    std::string message;
};

double parse_double(const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw FieldError{"'" + s + "' is not a number"};
    return v;
}

std::uint64_t parse_uint(const std::string& s) {
    std::uint64_t v = 0;
    int base = 10;
    std::string_view body = s;
    if (body.starts_with("0x") || body.starts_with("0X")) {
        base = 16;
        body.remove_prefix(2);
    } else if (body.starts_with("0b") || body.starts_with("0B")) {
        base = 2;
        body.remove_prefix(2);
    }
    auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), v, base);
    if (body.empty() || ec != std::errc{} || p != body.data() + body.size())
        throw FieldError{"'" + s + "' is not a nonnegative integer"};
    return v;
}

// Reads or writes one field depending on the mode. Each overload handles one
// field type so the field table is written once.
struct Reader {
    const std::string* value;
    void operator()(std::uint64_t& f) const { f = parse_uint(*value); }
    void operator()(unsigned& f) const { f = static_cast<unsigned>(parse_uint(*value)); }
    void operator()(double& f) const { f = parse_double(*value); }
    void operator()(bool& f) const {
        if (*value == "true" || *value == "1") f = true;
        else if (*value == "false" || *value == "0") f = false;
        else throw FieldError{"'" + *value + "' is not a boolean"};
    }
    void operator()(std::string& f) const { f = *value; }
    void operator()(RVec& f) const {
        f.clear();
        for (const auto& item : split_list(*value)) f.push_back(parse_double(item));
    }
    void operator()(std::vector<std::size_t>& f) const {
        f.clear();
        for (const auto& item : split_list(*value)) f.push_back(parse_uint(item));
    }
    void operator()(std::vector<modem::Scheme>& f) const {
        f.clear();
        for (const auto& item : split_list(*value)) f.push_back(modem::parse_scheme(item));
    }
    void operator()(channel::SnrReference& f) const { f = channel::parse_snr_reference(*value); }
    void operator()(channel::FadingMode& f) const { f = channel::parse_fading_mode(*value); }
};

struct Writer {
    std::string* out;
    void operator()(const std::uint64_t& f) const { *out = std::to_string(f); }
    void operator()(const unsigned& f) const { *out = std::to_string(f); }
    void operator()(const double& f) const { *out = fmt_double(f); }
    void operator()(const bool& f) const { *out = f ? "true" : "false"; }
    void operator()(const std::string& f) const { *out = f; }
    void operator()(const RVec& f) const {
        out->clear();
        for (std::size_t i = 0; i < f.size(); ++i) *out += (i ? ", " : "") + fmt_double(f[i]);
    }
    void operator()(const std::vector<std::size_t>& f) const {
        out->clear();
        for (std::size_t i = 0; i < f.size(); ++i) *out += (i ? ", " : "") + std::to_string(f[i]);
    }
    void operator()(const std::vector<modem::Scheme>& f) const {
        out->clear();
        for (std::size_t i = 0; i < f.size(); ++i)
            *out += (i ? ", " : "") + std::string(modem::scheme_name(f[i]));
    }
    void operator()(const channel::SnrReference& f) const {
        *out = channel::snr_reference_name(f);
    }
    void operator()(const channel::FadingMode& f) const { *out = channel::fading_mode_name(f); }
};

template <class Cfg, class F>
void visit_fields(Cfg& c, F&& f) {
    f("general", "master_seed", c.master_seed);
    f("general", "output_dir", c.output_dir);

    f("grassmann", "T", c.T);
    f("grassmann", "K", c.K);
    f("grassmann", "design_iterations", c.design_iterations);
    f("grassmann", "design_seed", c.design_seed);
    f("grassmann", "codebook_path", c.codebook_path);
    f("grassmann", "beta0", c.beta0);
    f("grassmann", "beta_growth", c.beta_growth);
    f("grassmann", "beta_period", c.beta_period);
    f("grassmann", "initial_step", c.initial_step);

    f("modem", "pn_taps", c.pn_taps);
    f("modem", "pn_state", c.pn_state);
    f("modem", "samples_per_chip", c.samples_per_chip);
    f("modem", "rolloff", c.rolloff);
    f("modem", "rrc_span_chips", c.rrc_span_chips);

    f("channel", "snr_reference", c.snr_reference);
    f("channel", "front_end_oversampling", c.front_end_oversampling);
    f("channel", "willie_snr_offset_db", c.willie_snr_offset_db);
    f("channel", "cfo", c.cfo);
    f("channel", "willie_fading", c.willie_fading);
    f("channel", "noiseless", c.noiseless);

    f("ber", "schemes", c.ber_schemes);
    f("ber", "snr_grid_db", c.ber_snr_grid_db);
    f("ber", "trials_per_point", c.ber_trials);
    f("ber", "blocks_per_trial", c.blocks_per_trial);

    f("detect", "schemes", c.detect_schemes);
    f("detect", "snr_grid_db", c.detect_snr_grid_db);
    f("detect", "trials_per_point", c.detect_trials);
    f("detect", "warden_sample_count", c.warden_sample_count);
    f("detect", "target_pfa", c.target_pfa);
    f("detect", "calibration_trials", c.calibration_trials);
    f("detect", "test", c.warden_test);
    f("detect", "threshold_path", c.threshold_path);

    f("kl", "T_list", c.kl_T);
    f("kl", "eta_list", c.kl_eta);
    f("kl", "samples", c.kl_samples);
    f("kl", "k", c.kl_k);
    f("kl", "design_iterations", c.kl_design_iterations);
    f("kl", "large_k", c.kl_large_k);
    f("kl", "large_k_iterations", c.kl_large_k_iterations);
}

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError(field + ": " + why);
}

void require_increasing(const RVec& grid, const std::string& field) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], field, "grid must be strictly increasing");
}

}  // namespace

channel::LinkBudget ExperimentConfig::link_budget() const {
    return {snr_reference, front_end_oversampling, willie_snr_offset_db};
}

modem::PulseShape ExperimentConfig::pulse() const {
    return {samples_per_chip, rolloff, rrc_span_chips};
}

grassmann::DesignParams ExperimentConfig::design_params() const {
    grassmann::DesignParams p;
    p.beta0 = beta0;
    p.beta_growth = beta_growth;
    p.beta_period = beta_period;
    p.initial_step = initial_step;
    return p;
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.ber_snr_grid_db = kBerGrid;
    c.detect_snr_grid_db = kDetectGrid;
    if (name == "desk") return c;
    if (name == "paper") {
        c.ber_trials = 4000;
        c.detect_trials = 4000;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::set<std::string> known;
    visit_fields(base, [&](const char* s, const char* k, auto&) {
        known.insert(std::string(s) + "." + k);
    });
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = " (line " + std::to_string(line_no) + ")";
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("malformed section header" + where);
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'" + where);
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        const std::string name = section + "." + key;
        if (!known.count(name)) throw ConfigError("unknown key '" + name + "'" + where);
        visit_fields(base, [&](const char* s, const char* k, auto& field) {
            if (section != s || key != k) return;
            try {
                Reader{&value}(field);
            } catch (const FieldError& e) {
                throw ConfigError(name + ": " + e.message + where);
            } catch (const ConfigError& e) {
                throw ConfigError(name + ": " + e.what() + where);
            }
        });
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string to_string(const ExperimentConfig& cfg) {
    std::string out, section;
    visit_fields(cfg, [&](const char* s, const char* k, const auto& field) {
        if (section != s) {
            out += (out.empty() ? "[" : "\n[") + std::string(s) + "]\n";
            section = s;
        }
        std::string v;
        Writer{&v}(field);
        out += std::string(k) + " = " + v + "\n";
    });
    return out;
}

void validate(const ExperimentConfig& c) {
    require(c.T >= 2, "grassmann.T", "must be at least 2");
    require(c.K >= 2 && std::has_single_bit(c.K), "grassmann.K", "must be a power of two >= 2");
    require(c.design_iterations >= 1, "grassmann.design_iterations", "must be at least 1");
    require(c.beta0 > 0.0, "grassmann.beta0", "must be positive");
    require(c.beta_growth >= 1.0, "grassmann.beta_growth", "must be at least 1");
    require(c.beta_period >= 1, "grassmann.beta_period", "must be at least 1");
    require(c.initial_step > 0.0, "grassmann.initial_step", "must be positive");
    require(c.pn_state >= 1 && c.pn_state < 32, "modem.pn_state", "must be a nonzero 5-bit value");
    require(c.pn_taps < 32, "modem.pn_taps", "must be a 5-bit mask");
    require(c.samples_per_chip >= 1, "modem.samples_per_chip", "must be at least 1");
    require(c.rolloff >= 0.0 && c.rolloff <= 1.0, "modem.rolloff", "must be in [0, 1]");
    require(c.rrc_span_chips >= 1, "modem.rrc_span_chips", "must be at least 1");
    require(c.front_end_oversampling >= 1.0, "channel.front_end_oversampling", "must be at least 1");
    require(std::isfinite(c.willie_snr_offset_db), "channel.willie_snr_offset_db", "must be finite");
    require(std::isfinite(c.cfo), "channel.cfo", "must be finite");
    require(c.ber_trials >= 1, "ber.trials_per_point", "must be at least 1");
    require(c.blocks_per_trial >= 1, "ber.blocks_per_trial", "must be at least 1");
    require_increasing(c.ber_snr_grid_db, "ber.snr_grid_db");
    require(c.detect_trials >= 1, "detect.trials_per_point", "must be at least 1");
    require_increasing(c.detect_snr_grid_db, "detect.snr_grid_db");
    require(c.warden_sample_count >= 4, "detect.warden_sample_count", "must be at least 4");
    require(c.target_pfa > 0.0 && c.target_pfa < 1.0, "detect.target_pfa", "must be in (0, 1)");
    require(c.calibration_trials >= 1000, "detect.calibration_trials", "must be at least 1000");
    require(c.warden_test == "jarque_bera", "detect.test", "only jarque_bera is implemented");
    require(c.kl_samples >= 2, "kl.samples", "must be at least 2");
    require(c.kl_k == 0 || c.kl_k + 1 <= c.kl_samples, "kl.k", "must be below kl.samples");
    for (double eta : c.kl_eta) require(eta > 0.0, "kl.eta_list", "entries must be positive");
    for (auto s : c.ber_schemes)
        require(s != modem::Scheme::Qam64 || c.T >= 4, "ber.schemes", "qam64 needs T >= 4");
    for (auto s : c.detect_schemes)
        require(s != modem::Scheme::Qam64 || c.T >= 4, "detect.schemes", "qam64 needs T >= 4");
}

}  // namespace lpd

#include "lpd/warden.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <boost/math/distributions/normal.hpp>

#include "lpd/error.hpp"
#include "lpd/kernels.hpp"
#include "lpd/parallel.hpp"
#include "lpd/rng.hpp"

namespace lpd::warden {

Moments sample_moments(std::span<const double> x) {
    if (x.size() < kJarqueBeraMinSamples)
        throw ValidationError("moment statistics need at least " +
                              std::to_string(kJarqueBeraMinSamples) + " samples");
    const auto& kt = kernels::active();
    const double n = static_cast<double>(x.size());
    const double mean = kt.sum(x.data(), x.size()) / n;
    const kernels::Moments4 m = kt.central_moments(x.data(), x.size(), mean);
    const double m2 = m.m2 / n;
    if (!(m2 > 0.0)) throw ValidationError("sample variance is zero; statistic undefined");
    return {(m.m3 / n) / std::pow(m2, 1.5), (m.m4 / n) / (m2 * m2)};
}

double jarque_bera_statistic(std::span<const double> x) {
    const Moments m = sample_moments(x);
    const double ek = m.kurtosis - 3.0;
    return static_cast<double>(x.size()) / 6.0 * (m.skewness * m.skewness + 0.25 * ek * ek);
}

RVec complexify(std::span<const cplx> z) {
    RVec out(2 * z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = z[i].real();
        out[z.size() + i] = z[i].imag();
    }
    return out;
}

std::unique_ptr<GaussianityTest> make_test(const std::string& name) {
    if (name == "jarque_bera") return std::make_unique<JarqueBera>();
    throw ConfigError("unknown Gaussianity test '" + name + "'");
}

double jarque_bera_asymptotic_threshold(double pfa) { return -2.0 * std::log(pfa); }

double empirical_upper_quantile(std::span<double> values, double pfa) {
    if (values.empty()) throw ValidationError("quantile of an empty set");
    if (!(pfa > 0.0 && pfa < 1.0)) throw ValidationError("target pfa must be in (0, 1)");
    const auto n = static_cast<double>(values.size());
    auto idx = static_cast<std::size_t>(std::ceil((1.0 - pfa) * n - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, values.size()) - 1;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx),
                     values.end());
    return values[idx];
}

CalibratedThreshold calibrate_threshold(const GaussianityTest& test, std::size_t n,
                                        double target_pfa, std::size_t trials, std::uint64_t seed,
                                        std::size_t threads) {
    if (trials < 1000) throw ValidationError("calibration needs at least 1000 trials");
    if (2 * n < kJarqueBeraMinSamples) throw ValidationError("calibration window too short");
    std::vector<double> stats(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        Rng rng(derive_seed(seed, {t}));
        thread_local CVec z;
        z.resize(n);
        for (auto& v : z) v = rng.complex_normal(1.0);
        stats[t] = test.statistic(complexify(z));
    });
    CalibratedThreshold out;
    out.test_name = test.name();
    out.sample_count = n;
    out.target_pfa = target_pfa;
    out.calibration_trials = trials;
    out.seed = seed;
    out.threshold = empirical_upper_quantile(stats, target_pfa);
    return out;
}

DetectionOutcome radiometer(std::span<const cplx> y, double noise_variance, double target_pfa) {
    if (y.size() < kRadiometerMinSamples)
        throw ValidationError("radiometer needs at least " +
                              std::to_string(kRadiometerMinSamples) + " samples");
    if (!(noise_variance > 0.0)) throw ValidationError("radiometer needs a positive noise variance");
    if (!(target_pfa > 0.0 && target_pfa < 1.0)) throw ValidationError("target pfa must be in (0, 1)");
    const double n = static_cast<double>(y.size());
    DetectionOutcome out;
    out.test_name = "radiometer";
    out.sample_count = y.size();
    out.statistic = kernels::active().energy(reinterpret_cast<const double*>(y.data()), y.size()) / n;
    const double z = boost::math::quantile(boost::math::normal(), 1.0 - target_pfa);
    // |y|^2 is exponential under H0: mean sigma^2, variance sigma^4.
    out.threshold = noise_variance * (1.0 + z / std::sqrt(n));
    out.decision = out.statistic > out.threshold ? Decision::D1 : Decision::D0;
    return out;
}

DetectionOutcome detect_frame(std::span<const cplx> rx, const CalibratedThreshold& threshold,
                              const GaussianityTest& test) {
    if (rx.size() != threshold.sample_count)
        throw DimensionError("detect_frame: window has " + std::to_string(rx.size()) +
                             " samples, threshold was calibrated for " +
                             std::to_string(threshold.sample_count));
    DetectionOutcome out;
    out.test_name = test.name();
    out.sample_count = rx.size();
    out.statistic = test.statistic(complexify(rx));
    out.threshold = threshold.threshold;
    out.decision = out.statistic > out.threshold ? Decision::D1 : Decision::D0;
    return out;
}

void save_threshold(const CalibratedThreshold& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t.threshold);
    out << "test = " << t.test_name << "\n"
        << "sample_count = " << t.sample_count << "\n";
    char pfa[64];
    std::snprintf(pfa, sizeof pfa, "%.17g", t.target_pfa);
    out << "target_pfa = " << pfa << "\n"
        << "seed = " << t.seed << "\n"
        << "calibration_trials = " << t.calibration_trials << "\n"
        << "threshold = " << buf << "\n";
    if (!out) throw Error("failed writing " + path.string());
}

CalibratedThreshold load_threshold(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("threshold file line " + std::to_string(line_no) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto field = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("threshold file is missing '" + key + "'");
        return it->second;
    };
    auto number = [&](const std::string& key) {
        const std::string& s = field(key);
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ParseError("threshold file field '" + key + "' is not a number");
        return v;
    };
    CalibratedThreshold t;
    t.test_name = field("test");
    t.sample_count = static_cast<std::size_t>(number("sample_count"));
    t.target_pfa = number("target_pfa");
    t.seed = std::stoull(field("seed"));
    t.calibration_trials = static_cast<std::size_t>(number("calibration_trials"));
    t.threshold = number("threshold");
    return t;
}

}  // namespace lpd::warden

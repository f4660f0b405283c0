#include "lppl/synth.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "lppl/error.hpp"

namespace lppl {
namespace {

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace

void SynthSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be finite and non-negative");
    if (n <= kParamCount) throw InputError("synthetic traces need at least 8 points");
    validate_params(params, n);
}

std::string_view to_string(Preset p) noexcept {
    switch (p) {
        case Preset::base: return "base";
        case Preset::oscillatory: return "oscillatory";
        case Preset::exponential: return "exponential";
    }
    return "unknown";
}

Preset parse_preset(std::string_view name) {
    if (name == "base") return Preset::base;
    if (name == "oscillatory") return Preset::oscillatory;
    if (name == "exponential") return Preset::exponential;
    throw InputError("unknown preset '" + std::string(name) + "' (expected base, oscillatory or exponential)");
}

SynthSpec preset_spec(Preset preset, std::uint64_t seed) {
    SynthSpec spec;
    spec.n = 1000;
    spec.seed = seed;
    switch (preset) {
        case Preset::base:
            spec.params = {5.0, 0.02, 1100.0, 0.68, 0.05, 9.0, 0.0};
            spec.sigma = 0.005;
            break;
        case Preset::oscillatory:
            spec.params = {5.0, 0.02, 1100.0, 0.68, 0.2, 9.0, 0.0};
            spec.sigma = 0.02;
            break;
        case Preset::exponential:
            spec.params = {5.0, 0.005, 1100.0, 1.0, 0.0, 1.0, 0.0};
            spec.sigma = 0.05;
            break;
    }
    return spec;
}

std::vector<double> brownian_path(std::size_t n, std::uint64_t seed) {
    NormalStream normals(seed);
    std::vector<double> path(n);
    double b = 0.0;
    for (double& v : path) {
        b += normals.next();
        v = b;
    }
    return path;
}

PriceSeries generate_trace(const SynthSpec& spec) {
    spec.validate();
    const auto noise = brownian_path(spec.n, spec.seed);
    std::vector<double> logp(spec.n);
    for (std::size_t k = 0; k < spec.n; ++k) {
        logp[k] = lppl_value(spec.params, static_cast<double>(k + 1)) + spec.sigma * noise[k];
    }
    return PriceSeries::with_uniform_weights(std::move(logp));
}

std::uint64_t derive_seed(std::uint64_t master_seed, Preset preset, std::size_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(preset), static_cast<std::uint32_t>(replicate)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<SuiteTrace> standard_suite(std::uint64_t master_seed) {
    std::vector<SuiteTrace> suite;
    suite.reserve(15);
    for (Preset preset : {Preset::base, Preset::oscillatory, Preset::exponential}) {
        for (std::size_t rep = 0; rep < 5; ++rep) {
            SynthSpec spec = preset_spec(preset, derive_seed(master_seed, preset, rep));
            PriceSeries series = generate_trace(spec);
            suite.push_back({preset, rep, spec, std::move(series)});
        }
    }
    return suite;
}

void write_trace_csv(const std::filesystem::path& path, const PriceSeries& series) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    out << "index,log_price,price\n" << std::setprecision(17);
    const auto logp = series.log_prices();
    for (std::size_t k = 0; k < logp.size(); ++k) {
        out << (k + 1) << ',' << logp[k] << ',' << std::exp(logp[k]) << '\n';
    }
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string spec_to_json(const SynthSpec& spec, std::optional<Preset> preset) {
    nlohmann::ordered_json j;
    j["generator"] = "lppl synth";
    j["rng"] = kRngAlgorithm;
    j["seed"] = spec.seed;
    if (preset) j["preset"] = to_string(*preset);
    j["n"] = spec.n;
    j["sigma"] = spec.sigma;
    const auto& p = spec.params;
    j["params"] = {{"A", p.A}, {"B", p.B}, {"T", p.T}, {"m", p.m}, {"C", p.C}, {"omega", p.omega}, {"phi", p.phi}};
    return j.dump(2);
}

}  // namespace lppl

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lppl/model.hpp"

namespace lppl {

/// Name of the noise generator recorded in trace metadata: 64-bit Mersenne Twister
/// feeding Box-Muller with uniforms u = (x >> 11) * 2^-53, both normals of each pair used.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/box-muller";

struct SynthSpec {
    LpplParams params;
    double sigma = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    /// Throws InputError for sigma < 0, n < 8 or invalid params, DomainError when n >= T.
    void validate() const;
};

enum class Preset { base, oscillatory, exponential };

std::string_view to_string(Preset p) noexcept;
Preset parse_preset(std::string_view name);

/// Parameter columns used for validation traces (n = 1000, T = 1100):
///   base         A=5 B=0.02  m=0.68 C=0.05 omega=9 phi=0 sigma=0.005
///   oscillatory  as base with C=0.2, sigma=0.02
///   exponential  A=5 B=0.005 m=1 C=0 omega=1 phi=0 sigma=0.05
SynthSpec preset_spec(Preset preset, std::uint64_t seed);

/// Standard Brownian motion at unit steps: B(0) = 0, B(i) = B(i-1) + N(0,1), for i = 1..n.
std::vector<double> brownian_path(std::size_t n, std::uint64_t seed);

/// ln p(i) = f(i) + sigma B(i), uniform weights.
PriceSeries generate_trace(const SynthSpec& spec);

struct SuiteTrace {
    Preset preset;
    std::size_t replicate = 0;
    SynthSpec spec;
    PriceSeries series;
};

/// Deterministic sub-seed for (preset, replicate) under a master seed, via std::seed_seq.
std::uint64_t derive_seed(std::uint64_t master_seed, Preset preset, std::size_t replicate);

/// Five traces for each preset, in preset order.
std::vector<SuiteTrace> standard_suite(std::uint64_t master_seed);

/// Writes `index,log_price,price` rows with round-trip precision.
void write_trace_csv(const std::filesystem::path& path, const PriceSeries& series);

/// JSON sidecar describing the trace parameters and RNG algorithm.
std::string spec_to_json(const SynthSpec& spec, std::optional<Preset> preset = std::nullopt);

}  // namespace lppl

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lppl/model.hpp"

namespace lppl {

enum class ExtremumKind { peak, trough };

/// Three indices 1 <= i < j < k <= n taken as consecutive-in-angle extrema.
struct Triple {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t k = 0;
    ExtremumKind kind = ExtremumKind::peak;

    /// Parses "i,j,k" or "i,j,k,peak|trough".
    static Triple parse(const std::string& text);

    friend bool operator==(const Triple&, const Triple&) = default;
};

struct SeedProvenance {
    enum class Source { exponential, triple };
    Source source = Source::exponential;
    std::optional<Triple> triple;

    std::string describe() const;
};

struct InitSeed {
    LpplParams params;
    SeedProvenance provenance;
};

/// Weighted regression ln p(i) = a + b i, read as the m = 1, C = 0 LPPL
/// ln p(i) = A - B (T - i) for a chosen T: B = b and A = a + b T.
struct ExponentialFit {
    double A = 0.0;
    double B = 0.0;
    double T = 0.0;
    double intercept = 0.0;
    double slope = 0.0;
    double error = 0.0;          ///< weighted SSE of the regression (independent of T)
    double average_error = 0.0;  ///< error / (n - 7)
    /// The slope was not positive and B was replaced by kSeedMinB (A refitted for it).
    bool slope_replaced = false;
};

inline constexpr double kSeedMinB = 1e-8;

/// Throws InputError unless at least two distinct indices carry positive weight.
ExponentialFit exponential_prefit(const PriceSeries& series, double T);

/// Default critical time of the pure exponential seed: n + n / 10.
double default_exponential_T(std::size_t n) noexcept;

/// The m = 1, C = 0 seed at T = n + n/10 with omega = 2 pi and phi = 0.
InitSeed exponential_seed(const PriceSeries& series);

/// rho = (j - i) / (k - j), omega = 2 pi / ln rho, T = (rho k - j) / (rho - 1),
/// phi = pi - omega ln(T - k) for peaks and -omega ln(T - k) for troughs;
/// A and B come from exponential_prefit at that T, with m = 1 and C = 0.
/// Throws InputError when the indices are out of order or rho <= 1.
InitSeed triple_to_seed(const Triple& triple, const PriceSeries& series);

/// Extrema of ln p over a window of +-half_width (the full window must fit inside the
/// series), grouped into consecutive same-kind triples with rho > 1, most recent first.
std::vector<Triple> propose_triples(const PriceSeries& series, std::size_t half_width);

inline constexpr std::size_t kDefaultExtremumWindow = 10;

struct SeedOptions {
    std::vector<Triple> manual;
    std::size_t auto_triples = 0;  ///< maximum number of detected triples to add
    std::size_t extremum_window = kDefaultExtremumWindow;
};

struct SeedSet {
    std::vector<InitSeed> seeds;       ///< exponential seed first
    std::vector<std::string> rejected; ///< diagnostics for dropped triples
};

/// Exponential seed, then the manual triples, then up to `auto_triples` detected ones.
/// Detection starts at `extremum_window` and doubles it (up to n/6) until enough
/// triples imply a critical time beyond the data; unusable detected triples are skipped.
SeedSet build_seed_set(const PriceSeries& series, const SeedOptions& options);

}  // namespace lppl

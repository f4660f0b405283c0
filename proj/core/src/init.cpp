#include "lppl/init.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lppl/error.hpp"

namespace lppl {
namespace {

std::size_t parse_index(const std::string& text) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        throw InputError("invalid triple index '" + text + "'");
    }
    if (pos != text.size() || text.starts_with('-')) throw InputError("invalid triple index '" + text + "'");
    return static_cast<std::size_t>(v);
}

// Local extremum test over [k - h, k + h] (0-based k). Strict on the left, non-strict on
// the right, so a plateau yields a single extremum at its first point.
bool is_extremum(std::span<const double> y, std::size_t k, std::size_t h, ExtremumKind kind) {
    const auto better = [kind](double a, double b) { return kind == ExtremumKind::peak ? a > b : a < b; };
    for (std::size_t q = k - h; q < k; ++q) {
        if (!better(y[k], y[q])) return false;
    }
    for (std::size_t q = k + 1; q <= k + h; ++q) {
        if (better(y[q], y[k])) return false;
    }
    return true;
}

}  // namespace

Triple Triple::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        parts.push_back(first == std::string::npos ? std::string() : item.substr(first, last - first + 1));
    }
    if (parts.size() != 3 && parts.size() != 4) {
        throw InputError("triple must be 'i,j,k' or 'i,j,k,peak|trough', got '" + text + "'");
    }
    Triple t{parse_index(parts[0]), parse_index(parts[1]), parse_index(parts[2]), ExtremumKind::peak};
    if (parts.size() == 4) {
        if (parts[3] == "peak") {
            t.kind = ExtremumKind::peak;
        } else if (parts[3] == "trough") {
            t.kind = ExtremumKind::trough;
        } else {
            throw InputError("triple kind must be 'peak' or 'trough', got '" + parts[3] + "'");
        }
    }
    return t;
}

std::string SeedProvenance::describe() const {
    if (source == Source::exponential || !triple) return "exponential";
    std::ostringstream os;
    os << (triple->kind == ExtremumKind::peak ? "peak" : "trough") << '(' << triple->i << ',' << triple->j << ','
       << triple->k << ')';
    return os.str();
}

ExponentialFit exponential_prefit(const PriceSeries& series, double T) {
    const auto y = series.log_prices();
    const auto w = series.weights();
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double x = static_cast<double>(k + 1);
        sw += w[k];
        sx += w[k] * x;
        sy += w[k] * y[k];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double dx = static_cast<double>(k + 1) - mx;
        sxx += w[k] * dx * dx;
        sxy += w[k] * dx * (y[k] - my);
    }
    if (!(sxx > 0.0)) throw InputError("exponential pre-fit needs at least two distinct weighted indices");

    ExponentialFit fit;
    fit.T = T;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double r = fit.intercept + fit.slope * static_cast<double>(k + 1) - y[k];
        fit.error += w[k] * r * r;
    }
    fit.average_error = fit.error / static_cast<double>(series.degrees_of_freedom());

    if (fit.slope > 0.0) {
        fit.B = fit.slope;
        fit.A = fit.intercept + fit.slope * T;
    } else {
        // Non-increasing prices: keep B > 0 and refit the level for that slope.
        fit.slope_replaced = true;
        fit.B = kSeedMinB;
        fit.A = my + kSeedMinB * (T - mx);
    }
    return fit;
}

double default_exponential_T(std::size_t n) noexcept {
    return static_cast<double>(n) + static_cast<double>(n) / 10.0;
}

InitSeed exponential_seed(const PriceSeries& series) {
    const double T = default_exponential_T(series.size());
    const ExponentialFit fit = exponential_prefit(series, T);
    InitSeed seed;
    seed.params = {fit.A, fit.B, T, 1.0, 0.0, 2.0 * std::numbers::pi, 0.0};
    seed.provenance.source = SeedProvenance::Source::exponential;
    return seed;
}

InitSeed triple_to_seed(const Triple& triple, const PriceSeries& series) {
    const std::size_t n = series.size();
    if (triple.i < 1 || !(triple.i < triple.j && triple.j < triple.k) || triple.k > n) {
        throw InputError("triple requires 1 <= i < j < k <= n");
    }
    const double i = static_cast<double>(triple.i);
    const double j = static_cast<double>(triple.j);
    const double k = static_cast<double>(triple.k);
    const double rho = (j - i) / (k - j);
    if (!(rho > 1.0)) throw InputError("triple spacing gives rho <= 1 (need j - i > k - j)");

    const double omega = 2.0 * std::numbers::pi / std::log(rho);
    const double T = (rho * k - j) / (rho - 1.0);
    const double angle_at_k = triple.kind == ExtremumKind::peak ? std::numbers::pi : 0.0;
    const double phi = angle_at_k - omega * std::log(T - k);

    if (!(T - static_cast<double>(n) >= kBoundaryGap)) {
        std::ostringstream os;
        os << "triple implies critical time T = " << T << " not beyond the series end n = " << n;
        throw InputError(os.str());
    }
    const ExponentialFit fit = exponential_prefit(series, T);
    InitSeed seed;
    seed.params = {fit.A, fit.B, T, 1.0, 0.0, omega, phi};
    seed.provenance = {SeedProvenance::Source::triple, triple};
    return seed;
}

std::vector<Triple> propose_triples(const PriceSeries& series, std::size_t half_width) {
    if (half_width < 1) throw InputError("extremum window half-width must be at least 1");
    const auto y = series.log_prices();
    const std::size_t n = y.size();
    std::vector<Triple> out;
    if (n < 2 * half_width + 1) return out;

    for (ExtremumKind kind : {ExtremumKind::peak, ExtremumKind::trough}) {
        std::vector<std::size_t> extrema;  // 1-based
        for (std::size_t k = half_width; k + half_width < n; ++k) {
            if (is_extremum(y, k, half_width, kind)) extrema.push_back(k + 1);
        }
        for (std::size_t a = 0; a + 2 < extrema.size(); ++a) {
            const Triple t{extrema[a], extrema[a + 1], extrema[a + 2], kind};
            if (t.j - t.i > t.k - t.j) out.push_back(t);
        }
    }
    // Most recent first; peaks before troughs on equal k.
    std::stable_sort(out.begin(), out.end(), [](const Triple& a, const Triple& b) {
        if (a.k != b.k) return a.k > b.k;
        if (a.j != b.j) return a.j > b.j;
        return a.i > b.i;
    });
    return out;
}

SeedSet build_seed_set(const PriceSeries& series, const SeedOptions& options) {
    SeedSet set;
    set.seeds.push_back(exponential_seed(series));
    auto add = [&](const Triple& t) {
        try {
            set.seeds.push_back(triple_to_seed(t, series));
            return true;
        } catch (const InputError& e) {
            set.rejected.push_back(SeedProvenance{SeedProvenance::Source::triple, t}.describe() + ": " + e.what());
            return false;
        }
    };
    for (const Triple& t : options.manual) add(t);
    if (options.auto_triples > 0) {
        // One candidate list per window size (w, 2w, 4w, ... up to n/6), drawn round robin.
        std::vector<std::vector<Triple>> lists;
        const std::size_t widest = std::max(options.extremum_window, series.size() / 6);
        for (std::size_t w = options.extremum_window; w <= widest; w *= 2) {
            lists.push_back(propose_triples(series, w));
        }
        std::vector<Triple> seen;
        std::vector<std::size_t> cursor(lists.size(), 0);
        std::size_t accepted = 0;
        bool progress = true;
        while (accepted < options.auto_triples && progress) {
            progress = false;
            for (std::size_t l = 0; l < lists.size() && accepted < options.auto_triples; ++l) {
                while (cursor[l] < lists[l].size()) {
                    const Triple t = lists[l][cursor[l]++];
                    if (std::find(seen.begin(), seen.end(), t) != seen.end()) continue;
                    seen.push_back(t);
                    try {
                        set.seeds.push_back(triple_to_seed(t, series));
                        ++accepted;
                        progress = true;
                        break;
                    } catch (const InputError&) {
                    }
                }
            }
        }
    }
    return set;
}

}  // namespace lppl

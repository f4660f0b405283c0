#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lppl {

/// Per-point weight schemes:
///   uniform       w(i) = 1
///   step(s, t)    w(i) = 1 on [s, t], 0 elsewhere
///   quadratic(W)  w(i) = (W / (n - i + W))^2, so w(n) = 1 and older points decay quadratically
struct WeightScheme {
    enum class Kind { uniform, step, quadratic };

    Kind kind = Kind::uniform;
    std::size_t s = 0;
    std::size_t t = 0;
    double W = 0.0;

    static WeightScheme uniform() { return {}; }
    static WeightScheme step(std::size_t s, std::size_t t) { return {Kind::step, s, t, 0.0}; }
    static WeightScheme quadratic(double W) { return {Kind::quadratic, 0, 0, W}; }

    /// Parses the CLI form: "uniform", "step:s,t" or "quad:W".
    static WeightScheme parse(std::string_view text);

    /// Inverse of parse().
    std::string to_string() const;

    friend bool operator==(const WeightScheme&, const WeightScheme&) = default;
};

/// Throws InputError unless 1 <= s <= t <= n (step) or W > 0 (quadratic).
void validate_scheme(const WeightScheme& scheme, std::size_t n);

std::vector<double> build_weights(const WeightScheme& scheme, std::size_t n);

}  // namespace lppl

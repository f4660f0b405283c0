#include "lppl/weights.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "lppl/error.hpp"

namespace lppl {
namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InputError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

WeightScheme WeightScheme::parse(std::string_view text) {
    if (text == "uniform") return uniform();
    if (text.starts_with("step:")) {
        const auto args = text.substr(5);
        const auto comma = args.find(',');
        if (comma == std::string_view::npos) throw InputError("step weights need 'step:s,t'");
        return step(parse_number<std::size_t>(args.substr(0, comma), "step start"),
                    parse_number<std::size_t>(args.substr(comma + 1), "step end"));
    }
    if (text.starts_with("quad:")) {
        return quadratic(parse_number<double>(text.substr(5), "quadratic W"));
    }
    throw InputError("unknown weight scheme '" + std::string(text) + "' (expected uniform, step:s,t or quad:W)");
}

std::string WeightScheme::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::uniform: os << "uniform"; break;
        case Kind::step: os << "step:" << s << ',' << t; break;
        case Kind::quadratic: {
            char buf[32];
            const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, W);
            os << "quad:" << std::string_view(buf, ec == std::errc{} ? static_cast<std::size_t>(end - buf) : 0);
            break;
        }
    }
    return os.str();
}

void validate_scheme(const WeightScheme& scheme, std::size_t n) {
    switch (scheme.kind) {
        case WeightScheme::Kind::uniform: return;
        case WeightScheme::Kind::step:
            if (scheme.s < 1 || scheme.s > scheme.t || scheme.t > n) {
                throw InputError("step weights require 1 <= s <= t <= n (got s=" + std::to_string(scheme.s) +
                                 ", t=" + std::to_string(scheme.t) + ", n=" + std::to_string(n) + ")");
            }
            return;
        case WeightScheme::Kind::quadratic:
            if (!(scheme.W > 0.0) || !std::isfinite(scheme.W)) {
                throw InputError("quadratic weights require W > 0");
            }
            return;
    }
}

std::vector<double> build_weights(const WeightScheme& scheme, std::size_t n) {
    validate_scheme(scheme, n);
    std::vector<double> w(n, 1.0);
    switch (scheme.kind) {
        case WeightScheme::Kind::uniform: break;
        case WeightScheme::Kind::step:
            for (std::size_t i = 1; i <= n; ++i) w[i - 1] = (i >= scheme.s && i <= scheme.t) ? 1.0 : 0.0;
            break;
        case WeightScheme::Kind::quadratic:
            for (std::size_t i = 1; i <= n; ++i) {
                const double ratio = scheme.W / (static_cast<double>(n - i) + scheme.W);
                w[i - 1] = ratio * ratio;
            }
            break;
    }
    return w;
}

}  // namespace lppl

#include "lppl/model.hpp"

#include <cmath>
#include <sstream>

#include "lppl/error.hpp"
#include "parallel.hpp"

namespace lppl {
namespace {

struct PointTerms {
    double dt;       // T - x
    double log_dt;   // ln(T - x)
    double g;        // (T - x)^m
    double cos_t;
    double sin_t;
    double bracket;  // 1 + C cos(theta)
};

inline PointTerms point_terms(const LpplParams& p, double x) {
    PointTerms t{};
    t.dt = p.T - x;
    t.log_dt = std::log(t.dt);
    t.g = std::pow(t.dt, p.m);
    const double theta = p.omega * t.log_dt + p.phi;
    t.cos_t = std::cos(theta);
    t.sin_t = std::sin(theta);
    t.bracket = 1.0 + p.C * t.cos_t;
    return t;
}

inline double value_from(const LpplParams& p, const PointTerms& t) { return p.A - p.B * t.g * t.bracket; }

inline void jacobian_from(const LpplParams& p, const PointTerms& t, std::span<double, kParamCount> row) {
    const double bg = p.B * t.g;
    const double g_over_dt = t.g / t.dt;  // (T - x)^(m - 1)
    row[index_of(Param::A)] = 1.0;
    row[index_of(Param::B)] = -t.g * t.bracket;
    row[index_of(Param::T)] = -p.B * p.m * g_over_dt * t.bracket + p.B * p.C * p.omega * g_over_dt * t.sin_t;
    row[index_of(Param::m)] = -bg * t.log_dt * t.bracket;
    row[index_of(Param::C)] = -bg * t.cos_t;
    row[index_of(Param::omega)] = bg * p.C * t.sin_t * t.log_dt;
    row[index_of(Param::phi)] = bg * p.C * t.sin_t;
}

void require_inside(const LpplParams& p, double x) {
    if (!(p.T - x > 0.0)) {
        std::ostringstream os;
        os << "LPPL evaluated at x = " << x << " with T = " << p.T << " (requires x < T)";
        throw DomainError(os.str());
    }
}

void require_gap(const LpplParams& p, std::size_t n) {
    if (!(p.T - static_cast<double>(n) >= kBoundaryGap)) {
        std::ostringstream os;
        os << "critical time T = " << p.T << " is within " << kBoundaryGap << " of the last sample n = " << n;
        throw DomainError(os.str(), n);
    }
}

template <bool WithJacobian>
void evaluate_into(const LpplParams& p, const PriceSeries& series, std::size_t threads, ResidualReport& report,
                   Jacobian* jac) {
    const std::size_t n = series.size();
    require_gap(p, n);
    report.residuals.assign(n, 0.0);
    const auto logp = series.log_prices();
    const auto w = series.weights();

    const std::size_t blocks = detail::block_count(n, kReductionBlock);
    std::vector<double> partial(blocks, 0.0);

    detail::parallel_chunks(blocks, threads, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t lo = b * kReductionBlock;
            const std::size_t hi = std::min(n, lo + kReductionBlock);
            double sum = 0.0;
            for (std::size_t k = lo; k < hi; ++k) {
                const auto t = point_terms(p, static_cast<double>(k + 1));
                const double r = value_from(p, t) - logp[k];
                report.residuals[k] = r;
                sum += w[k] * r * r;
                if constexpr (WithJacobian) jacobian_from(p, t, jac->row(k));
            }
            partial[b] = sum;
        }
    });

    double error = 0.0;
    for (double s : partial) error += s;
    if (!std::isfinite(error)) {
        throw DomainError("non-finite error while evaluating LPPL residuals");
    }
    report.error = error;
    report.average_error = error / static_cast<double>(series.degrees_of_freedom());
}

}  // namespace

bool satisfies_constraints(const LpplParams& p, std::size_t n) noexcept {
    return p.B > 0.0 && p.m > 0.0 && p.m <= 1.0 && p.T - static_cast<double>(n) >= kBoundaryGap &&
           std::isfinite(p.A) && std::isfinite(p.C) && std::isfinite(p.omega) && std::isfinite(p.phi);
}

void validate_params(const LpplParams& p, std::size_t n) {
    for (double v : p.to_array()) {
        if (!std::isfinite(v)) throw InputError("LPPL parameters must be finite");
    }
    if (!(p.B > 0.0)) throw InputError("LPPL parameter B must be positive");
    if (!(p.m > 0.0 && p.m <= 1.0)) throw InputError("LPPL parameter m must lie in (0, 1]");
    require_gap(p, n);
}

double lppl_value(const LpplParams& p, double x) {
    require_inside(p, x);
    return value_from(p, point_terms(p, x));
}

JacobianRow lppl_jacobian_row(const LpplParams& p, double x) {
    require_inside(p, x);
    JacobianRow row{};
    jacobian_from(p, point_terms(p, x), row);
    return row;
}

PriceSeries::PriceSeries(std::vector<double> log_prices, std::vector<double> weights)
    : log_prices_(std::move(log_prices)), weights_(std::move(weights)) {
    if (log_prices_.size() != weights_.size()) {
        throw InputError("price series and weight vector differ in length");
    }
    std::size_t positive = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (!std::isfinite(log_prices_[k])) {
            throw InputError("non-finite log price at index " + std::to_string(k + 1));
        }
        const double wk = weights_[k];
        if (!std::isfinite(wk) || wk < 0.0) {
            throw InputError("weight at index " + std::to_string(k + 1) + " must be finite and non-negative");
        }
        if (wk > 0.0) ++positive;
    }
    if (positive <= kParamCount) {
        throw InputError("at least " + std::to_string(kParamCount + 1) +
                         " points with positive weight are required, got " + std::to_string(positive));
    }
}

PriceSeries PriceSeries::with_uniform_weights(std::vector<double> log_prices) {
    std::vector<double> w(log_prices.size(), 1.0);
    return PriceSeries(std::move(log_prices), std::move(w));
}

PriceSeries PriceSeries::reweighted(std::vector<double> weights) const {
    return PriceSeries(log_prices_, std::move(weights));
}

ResidualReport evaluate_residuals(const LpplParams& p, const PriceSeries& series, std::size_t threads) {
    ResidualReport report;
    evaluate_into<false>(p, series, threads, report, nullptr);
    return report;
}

BatchEvaluation evaluate_batch(const LpplParams& p, const PriceSeries& series, std::size_t threads) {
    BatchEvaluation out;
    out.jacobian = Jacobian(series.size());
    evaluate_into<true>(p, series, threads, out.report, &out.jacobian);
    return out;
}

}  // namespace lppl

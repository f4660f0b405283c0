#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lppl {

inline constexpr std::size_t kParamCount = 7;

/// Minimum admissible distance between the critical time and the last sample.
inline constexpr double kBoundaryGap = 1e-6;

/// Positions of the parameters inside the packed 7-vector and Jacobian rows.
enum class Param : std::size_t { A = 0, B, T, m, C, omega, phi };

constexpr std::size_t index_of(Param p) noexcept { return static_cast<std::size_t>(p); }

/// Parameters of f(x) = A - B (T - x)^m (1 + C cos(omega ln(T - x) + phi)).
///
/// T is expressed in trading-period units (row index of the series, 1-based).
struct LpplParams {
    double A = 0.0;
    double B = 0.0;
    double T = 0.0;
    double m = 0.0;
    double C = 0.0;
    double omega = 0.0;
    double phi = 0.0;

    std::array<double, kParamCount> to_array() const noexcept { return {A, B, T, m, C, omega, phi}; }

    static LpplParams from_array(std::span<const double, kParamCount> v) noexcept {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }

    friend bool operator==(const LpplParams&, const LpplParams&) = default;
};

/// True when B > 0, 0 < m <= 1 and T - n >= kBoundaryGap.
bool satisfies_constraints(const LpplParams& p, std::size_t n) noexcept;

/// Throws InputError for B or m out of range and DomainError when T is too close to n.
void validate_params(const LpplParams& p, std::size_t n);

/// f(x). Throws DomainError if T - x <= 0.
double lppl_value(const LpplParams& p, double x);

using JacobianRow = std::array<double, kParamCount>;

/// Analytic partials of f at x, ordered as Param. Throws DomainError if T - x <= 0.
JacobianRow lppl_jacobian_row(const LpplParams& p, double x);

/// Log prices ln p(1..n) with per-point weights.
///
/// Indexing through log_price()/weight() is 1-based; the spans are 0-based views.
class PriceSeries {
public:
    /// Requires equal lengths, finite log prices, finite non-negative weights and at
    /// least eight strictly positive weights. Throws InputError otherwise.
    PriceSeries(std::vector<double> log_prices, std::vector<double> weights);

    static PriceSeries with_uniform_weights(std::vector<double> log_prices);

    std::size_t size() const noexcept { return log_prices_.size(); }
    /// d = n - 7, always over the full length regardless of zero weights.
    std::size_t degrees_of_freedom() const noexcept { return size() - kParamCount; }

    std::span<const double> log_prices() const noexcept { return log_prices_; }
    std::span<const double> weights() const noexcept { return weights_; }

    double log_price(std::size_t i) const { return log_prices_.at(i - 1); }
    double weight(std::size_t i) const { return weights_.at(i - 1); }

    PriceSeries reweighted(std::vector<double> weights) const;

private:
    std::vector<double> log_prices_;
    std::vector<double> weights_;
};

struct ResidualReport {
    std::vector<double> residuals;  ///< r_i = f(i) - ln p(i), stored 0-based
    double error = 0.0;             ///< sum w(i) r_i^2
    double average_error = 0.0;     ///< error / (n - 7)
};

/// Dense row-major n x 7 Jacobian of f over the sample indices.
class Jacobian {
public:
    Jacobian() = default;
    explicit Jacobian(std::size_t rows) : rows_(rows), data_(rows * kParamCount) {}

    std::size_t rows() const noexcept { return rows_; }
    std::span<double, kParamCount> row(std::size_t r) noexcept {
        return std::span<double, kParamCount>(data_.data() + r * kParamCount, kParamCount);
    }
    std::span<const double, kParamCount> row(std::size_t r) const noexcept {
        return std::span<const double, kParamCount>(data_.data() + r * kParamCount, kParamCount);
    }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Jacobian&, const Jacobian&) = default;

private:
    std::size_t rows_ = 0;
    std::vector<double> data_;
};

struct BatchEvaluation {
    ResidualReport report;
    Jacobian jacobian;
};

/// Points per reduction block. Partial sums of E are formed per block and added in
/// block order, so E is bitwise identical for every thread count.
inline constexpr std::size_t kReductionBlock = 256;

/// Residuals and E only, parallel over `threads` contiguous chunks.
/// Throws DomainError (with the offending index) if T - n < kBoundaryGap.
ResidualReport evaluate_residuals(const LpplParams& p, const PriceSeries& series, std::size_t threads = 1);

/// Residuals, E and the full Jacobian.
BatchEvaluation evaluate_batch(const LpplParams& p, const PriceSeries& series, std::size_t threads = 1);

}  // namespace lppl

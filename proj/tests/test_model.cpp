#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lppl/error.hpp"
#include "lppl/model.hpp"
#include "oracles.hpp"

using namespace lppl;

namespace {

const LpplParams kBase{5.0, 0.02, 1100.0, 0.68, 0.05, 9.0, 0.0};

double rel_err(double a, long double b) {
    const long double scale = std::max(std::fabs(static_cast<long double>(a)), std::fabs(b));
    return scale == 0.0L ? 0.0 : static_cast<double>(std::fabs(a - b) / scale);
}

}  // namespace

TEST(LpplValue, AffineWhenMIsOneAndCIsZero) {
    const LpplParams p{5.0, 0.02, 1100.0, 1.0, 0.0, 1.0, 0.0};
    EXPECT_DOUBLE_EQ(lppl_value(p, 100.0), -15.0);
    for (double x : {1.0, 17.0, 512.5, 999.0}) {
        EXPECT_EQ(lppl_value(p, x), p.A - p.B * (p.T - x));
    }
}

TEST(LpplValue, UnitDistanceFromCriticalTime) {
    const LpplParams p{5.0, 0.02, 1100.0, 0.68, 0.0, 9.0, 0.0};
    EXPECT_DOUBLE_EQ(lppl_value(p, 1099.0), 4.98);
}

TEST(LpplValue, MatchesLongDoubleReference) {
    for (double x : {1.0, 250.0, 999.0}) {
        EXPECT_LT(rel_err(lppl_value(kBase, x), oracle::lppl(oracle::widen(kBase), x)), 1e-14);
    }
}

TEST(LpplValue, RejectsPointsAtOrBeyondT) {
    EXPECT_THROW(lppl_value(kBase, 1100.0), DomainError);
    EXPECT_THROW(lppl_value(kBase, 1200.0), DomainError);
    EXPECT_THROW(lppl_jacobian_row(kBase, 1100.0), DomainError);
}

TEST(Jacobian, FirstComponentIsOne) {
    for (double x : {1.0, 500.0, 1000.0}) EXPECT_EQ(lppl_jacobian_row(kBase, x)[index_of(Param::A)], 1.0);
}

TEST(Jacobian, OscillationPartialsVanishWithoutC) {
    LpplParams p = kBase;
    p.C = 0.0;
    const auto row = lppl_jacobian_row(p, 321.0);
    EXPECT_EQ(row[index_of(Param::omega)], 0.0);
    EXPECT_EQ(row[index_of(Param::phi)], 0.0);
}

TEST(Jacobian, BaseParamsMatchCentralDifferences) {
    const auto row = lppl_jacobian_row(kBase, 500.0);
    for (std::size_t k = 0; k < kParamCount; ++k) {
        EXPECT_LT(rel_err(row[k], oracle::central_difference(kBase, 500.0, k)), 1e-6) << "parameter " << k;
    }
}

TEST(Jacobian, RandomParamsMatchCentralDifferences) {
    // Includes m up to 1; the differencing oracle is valid on both sides of m = 1.
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double n = 1000.0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const LpplParams p{1.0 + 9.0 * u(rng), 1e-3 + u(rng), n + 1.0 + 500.0 * u(rng), 0.05 + 0.95 * u(rng),
                           -0.5 + u(rng),       2.0 + 18.0 * u(rng), 2.0 * 3.141592653589793 * u(rng)};
        for (int s = 0; s < 100; ++s) {
            const double x = 1.0 + (n - 1.0) * u(rng);
            const auto row = lppl_jacobian_row(p, x);
            for (std::size_t k = 0; k < kParamCount; ++k) {
                const long double fd = oracle::central_difference(p, x, k);
                // Components that cancel to nearly zero are compared on the scale of f.
                const long double floor = 1e-9L * (1.0L + std::fabs(oracle::lppl(oracle::widen(p), x)));
                const double e = std::fabs(row[k] - fd) <= floor ? 0.0 : rel_err(row[k], fd);
                worst = std::max(worst, e);
            }
        }
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(PriceSeries, ValidatesInput) {
    EXPECT_THROW(PriceSeries({1, 2, 3}, {1, 1}), InputError);
    EXPECT_THROW(PriceSeries::with_uniform_weights({1, 2, 3, 4, 5, 6, 7}), InputError);
    EXPECT_THROW(PriceSeries({1, 2, 3, 4, 5, 6, 7, NAN}, std::vector<double>(8, 1.0)), InputError);
    std::vector<double> w(8, 1.0);
    w[3] = -1.0;
    EXPECT_THROW(PriceSeries(std::vector<double>(8, 1.0), w), InputError);
    w[3] = 0.0;
    EXPECT_THROW(PriceSeries(std::vector<double>(8, 1.0), w), InputError);  // only 7 positive weights
    const auto ok = PriceSeries::with_uniform_weights({1, 2, 3, 4, 5, 6, 7, 8});
    EXPECT_EQ(ok.size(), 8u);
    EXPECT_EQ(ok.degrees_of_freedom(), 1u);
    EXPECT_EQ(ok.log_price(1), 1.0);
    EXPECT_EQ(ok.log_price(8), 8.0);
}

TEST(EvaluateBatch, NoiselessSeriesHasZeroErrorAtTruth) {
    const auto series = PriceSeries::with_uniform_weights(oracle::noiseless_log_prices(kBase, 1000));
    EXPECT_LT(evaluate_residuals(kBase, series).error, 1e-20);
}

TEST(EvaluateBatch, ErrorMatchesLongDoubleSum) {
    std::vector<double> y(1000), w(1000);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 0.01);
    const auto clean = oracle::noiseless_log_prices(kBase, 1000);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = clean[i] + noise(rng);
        w[i] = 0.5 + (i % 3);
    }
    const PriceSeries series(y, w);
    const auto report = evaluate_residuals(kBase, series);
    const long double expected = oracle::weighted_sse(kBase, y, w);
    EXPECT_LT(rel_err(report.error, expected), 1e-12);
    EXPECT_DOUBLE_EQ(report.average_error, report.error / 993.0);
    for (std::size_t i = 1; i <= 1000; ++i) {
        EXPECT_NEAR(report.residuals[i - 1], lppl_value(kBase, static_cast<double>(i)) - y[i - 1], 1e-15);
    }
}

TEST(EvaluateBatch, ZeroWeightPointsDoNotContribute) {
    // PriceSeries refuses all-zero weights, so the property is checked on the zero part.
    std::vector<double> y(40, 3.0), w(40, 0.0);
    for (std::size_t i = 32; i < 40; ++i) w[i] = 1.0;
    const LpplParams p{3.0, 0.02, 1100.0, 0.68, 0.05, 9.0, 0.0};
    const double before = evaluate_residuals(p, PriceSeries(y, w)).error;
    for (std::size_t i = 0; i < 32; ++i) y[i] = 100.0 + static_cast<double>(i);
    EXPECT_EQ(evaluate_residuals(p, PriceSeries(y, w)).error, before);
    EXPECT_THROW(PriceSeries(y, std::vector<double>(40, 0.0)), InputError);
}

TEST(EvaluateBatch, DoublingWeightsDoublesError) {
    std::vector<double> y(600), w1(600), w2(600);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = 3.0 + 0.001 * static_cast<double>(i) + 0.01 * std::sin(0.1 * static_cast<double>(i));
        w1[i] = 1.0 + static_cast<double>(i % 5);
        w2[i] = 2.0 * w1[i];
    }
    const LpplParams p{5.0, 0.02, 700.0, 0.68, 0.05, 9.0, 0.0};
    const double e1 = evaluate_residuals(p, PriceSeries(y, w1)).error;
    const double e2 = evaluate_residuals(p, PriceSeries(y, w2)).error;
    EXPECT_EQ(e2, 2.0 * e1);  // power-of-two scaling is exact
}

TEST(EvaluateBatch, IdenticalAcrossThreadCounts) {
    std::vector<double> y = oracle::noiseless_log_prices(kBase, 1000);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.003 * std::cos(static_cast<double>(i));
    const auto series = PriceSeries::with_uniform_weights(y);
    const LpplParams p{5.1, 0.021, 1103.0, 0.66, 0.04, 8.7, 0.3};
    const auto one = evaluate_batch(p, series, 1);
    for (std::size_t threads : {2u, 3u, 8u}) {
        const auto many = evaluate_batch(p, series, threads);
        EXPECT_EQ(one.report.residuals, many.report.residuals);
        EXPECT_TRUE(one.jacobian == many.jacobian);
        EXPECT_EQ(one.report.error, many.report.error);
    }
}

TEST(EvaluateBatch, JacobianRowsMatchPointwiseFunction) {
    const auto series = PriceSeries::with_uniform_weights(oracle::noiseless_log_prices(kBase, 300));
    const LpplParams p{5.0, 0.02, 400.0, 0.5, 0.1, 7.0, 1.0};
    const auto batch = evaluate_batch(p, series, 2);
    ASSERT_EQ(batch.jacobian.rows(), 300u);
    for (std::size_t i = 1; i <= 300; i += 37) {
        const auto row = lppl_jacobian_row(p, static_cast<double>(i));
        for (std::size_t k = 0; k < kParamCount; ++k) EXPECT_EQ(batch.jacobian.row(i - 1)[k], row[k]);
    }
}

TEST(EvaluateBatch, BoundaryGapIsADomainErrorNamingTheIndex) {
    const auto series = PriceSeries::with_uniform_weights(std::vector<double>(100, 1.0));
    LpplParams p = kBase;
    p.T = 100.0 + 1e-7;
    try {
        evaluate_residuals(p, series);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        ASSERT_TRUE(e.index().has_value());
        EXPECT_EQ(*e.index(), 100u);
    }
    p.T = 100.0 + 2e-6;
    EXPECT_NO_THROW(evaluate_residuals(p, series));
}

TEST(Constraints, SatisfiesAndValidate) {
    EXPECT_TRUE(satisfies_constraints(kBase, 1000));
    LpplParams p = kBase;
    p.B = 0.0;
    EXPECT_FALSE(satisfies_constraints(p, 1000));
    EXPECT_THROW(validate_params(p, 1000), InputError);
    p = kBase;
    p.m = 1.5;
    EXPECT_THROW(validate_params(p, 1000), InputError);
    p = kBase;
    p.T = 1000.0;
    EXPECT_FALSE(satisfies_constraints(p, 1000));
    EXPECT_THROW(validate_params(p, 1000), DomainError);
}

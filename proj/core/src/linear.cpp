#include "lppl/linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lppl/error.hpp"
#include "parallel.hpp"

namespace lppl {
namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kTieTolerance = 0.01;
constexpr std::size_t kMaxL = std::size_t{1} << 20;

class CostMeter {
public:
    CostMeter(CostClock clock, std::size_t n) : clock_(clock), n_(static_cast<double>(n)) {}

    void start() { t0_ = std::chrono::steady_clock::now(); }

    // Work units: one point of f costs 1, a point of f plus its 7 partials costs 8.
    double lm_cost(const FitResult& r) const {
        if (clock_ == CostClock::wall) return seconds();
        return n_ * (static_cast<double>(r.residual_evaluations) + 8.0 * static_cast<double>(r.jacobian_evaluations));
    }

    // Basis columns (about one Jacobian pass), QR and the error re-evaluation.
    double linear_cost() const {
        if (clock_ == CostClock::wall) return seconds();
        return n_ * 4.0;
    }

private:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

    CostClock clock_;
    double n_;
    std::chrono::steady_clock::time_point t0_{};
};

double rate(double reduction, double cost) noexcept {
    if (!(reduction > 0.0)) return 0.0;
    if (!(cost > 0.0)) return std::numeric_limits<double>::infinity();
    return reduction / cost;
}

}  // namespace

LinearSolveResult solve_linear_subsystem(const PriceSeries& series, const NonlinearPart& fixed, std::size_t threads) {
    const std::size_t n = series.size();
    if (!(fixed.T - static_cast<double>(n) >= kBoundaryGap)) {
        throw DomainError("linear sub-system requires T > n", n);
    }
    const auto logp = series.log_prices();
    const auto w = series.weights();

    Eigen::MatrixX3d design(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    detail::parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            const double dt = fixed.T - static_cast<double>(k + 1);
            const double v = std::pow(dt, fixed.m);
            const double z = v * std::cos(fixed.omega * std::log(dt) + fixed.phi);
            const double sw = std::sqrt(w[k]);
            const auto r = static_cast<Eigen::Index>(k);
            design(r, 0) = sw;
            design(r, 1) = -sw * v;
            design(r, 2) = -sw * z;
            rhs(r) = sw * logp[k];
        }
    });

    LinearSolveResult out;
    Eigen::ColPivHouseholderQR<Eigen::MatrixX3d> qr(design);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < 3) {
        out.status = LinearSolveResult::Status::rank_deficient;
        return out;
    }
    const Eigen::Vector3d coef = qr.solve(rhs);
    if (!coef.allFinite()) {
        out.status = LinearSolveResult::Status::rank_deficient;
        return out;
    }
    out.A = coef(0);
    out.beta = coef(1);
    out.gamma = coef(2);
    if (!(out.beta >= kMinB)) {
        out.status = LinearSolveResult::Status::nonpositive_beta;
        return out;
    }
    out.C = out.gamma / out.beta;
    out.status = LinearSolveResult::Status::ok;
    out.error = evaluate_residuals(out.params(fixed), series, threads).error;
    return out;
}

std::optional<RuntimeModel> estimate_runtime_model(const Measurement& a, const Measurement& b) noexcept {
    if (a.iterations == b.iterations) return std::nullopt;
    const double la = static_cast<double>(a.iterations);
    const double lb = static_cast<double>(b.iterations);
    const double t1 = (b.cost - a.cost) / (lb - la);
    if (!(t1 >= 0.0)) return std::nullopt;
    return RuntimeModel{a.cost - t1 * la, t1};
}

double InterleaveState::lm_rate() const noexcept {
    if (!lm_last || lm_last->iterations == 0) return 0.0;
    if (model && model->T1 > 0.0) {
        return rate(lm_last->error_reduction, model->T1 * static_cast<double>(lm_last->iterations));
    }
    return rate(lm_last->error_reduction, lm_last->cost);
}

double InterleaveState::linear_rate() const noexcept {
    if (!linear_last) return 0.0;
    return rate(linear_last->error_reduction, linear_last->cost);
}

std::size_t update_L(InterleaveState& state, const Measurement& lm, const Measurement& linear) {
    if (state.lm_last && state.lm_last->iterations != lm.iterations) state.lm_previous = state.lm_last;
    state.lm_last = lm;
    if (state.lm_previous) {
        if (auto m = estimate_runtime_model(*state.lm_previous, *state.lm_last)) state.model = m;
    }
    state.linear_last = linear;

    const double lm_r = state.lm_rate();
    const double lin_r = state.linear_rate();
    if (state.phase == InterleaveState::Phase::startup) {
        if (lm_r >= lin_r) {
            state.L = std::min(state.L * 2, kMaxL);
        } else {
            state.phase = InterleaveState::Phase::regime;
        }
        return state.L;
    }

    const double scale = std::max(lm_r, lin_r);
    const bool tie = lm_r == lin_r || (std::isfinite(scale) && std::abs(lm_r - lin_r) <= kTieTolerance * scale);
    if (tie || lm_r > lin_r) {
        state.L = std::min(state.L + 1, kMaxL);
    } else {
        state.L = std::max<std::size_t>(state.L - 1, 1);
    }
    return state.L;
}

void InterleaveConfig::validate() const {
    lm.validate();
    if (L < 1) throw InputError("interleave bound L must be at least 1");
    if (!(min_relative_gain >= 0.0 && min_relative_gain < 1.0)) {
        throw InputError("min_relative_gain must lie in [0, 1)");
    }
}

InterleaveResult interleave_fit(const PriceSeries& series, const LpplParams& seed, const InterleaveConfig& config,
                                std::size_t threads) {
    config.validate();
    validate_params(seed, series.size());
    const auto t0 = std::chrono::steady_clock::now();

    InterleaveResult result;
    FitResult& fit = result.fit;
    InterleaveTrace& trace = result.trace;

    if (!config.linear) {
        LmConfig lm = config.lm;
        lm.max_iterations = config.max_total_iterations;
        fit = lm_fit(series, seed, lm, threads);
        return result;
    }

    DampingState damping = DampingState::initial(config.lm);
    InterleaveState schedule;
    schedule.L = config.L;
    CostMeter meter(config.clock, series.size());

    LpplParams incumbent = seed;
    double error = evaluate_residuals(seed, series, threads).error;
    fit.error_history.push_back(error);
    Termination termination = Termination::converged;

    while (true) {
        const std::size_t remaining = config.max_total_iterations - fit.iterations;
        if (remaining == 0) {
            termination = Termination::iteration_cap;
            break;
        }
        trace.L_history.push_back(schedule.L);
        ++trace.rounds;

        LmConfig lm = config.lm;
        lm.max_iterations = std::min(schedule.L, remaining);
        meter.start();
        const FitResult round = lm_fit(series, incumbent, lm, threads, damping);
        const Measurement lm_measure{round.iterations, meter.lm_cost(round), error - round.error};

        incumbent = round.params;
        error = round.error;
        fit.iterations += round.iterations;
        fit.restarts += round.restarts;
        fit.residual_evaluations += round.residual_evaluations;
        fit.jacobian_evaluations += round.jacobian_evaluations;
        fit.error_history.insert(fit.error_history.end(), round.error_history.begin() + 1, round.error_history.end());
        fit.mu_bar_history.insert(fit.mu_bar_history.end(), round.mu_bar_history.begin(), round.mu_bar_history.end());
        const bool lm_finished = round.termination != Termination::iteration_cap;

        meter.start();
        const NonlinearPart fixed = NonlinearPart::of(incumbent);
        const LinearSolveResult lin = solve_linear_subsystem(series, fixed, threads);
        const bool improved = lin.ok() && lin.error < error * (1.0 - config.min_relative_gain) &&
                              satisfies_constraints(lin.params(fixed), series.size());
        Measurement lin_measure{0, meter.linear_cost(), 0.0};
        if (improved) {
            lin_measure.error_reduction = error - lin.error;
            trace.linear_improvement += error - lin.error;
            ++trace.linear_accepted;
            incumbent = lin.params(fixed);
            error = lin.error;
            fit.error_history.push_back(error);
            // LM gets another chance from the new point; mu_bar keeps its value.
            damping.exhausted = false;
        }

        if (!improved && lm_finished) {
            termination = round.termination;
            break;
        }
        if (config.adaptive_L) update_L(schedule, lm_measure, lin_measure);
    }

    fit.params = incumbent;
    fit.error = error;
    fit.average_error = error / static_cast<double>(series.degrees_of_freedom());
    fit.termination = termination;
    fit.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace lppl

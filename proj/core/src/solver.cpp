#include "lppl/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include "lppl/error.hpp"
#include "parallel.hpp"

namespace lppl {
namespace {

using Matrix7 = Eigen::Matrix<double, 7, 7>;
using Vector7 = Eigen::Matrix<double, 7, 1>;

struct NormalEquations {
    Matrix7 jtwj = Matrix7::Zero();
    Vector7 jtwr = Vector7::Zero();
};

// J'WJ and J'W r, accumulated per reduction block and summed in block order so the
// result does not depend on the thread count.
NormalEquations normal_equations(const BatchEvaluation& eval, std::span<const double> weights, std::size_t threads) {
    const std::size_t n = weights.size();
    const std::size_t blocks = detail::block_count(n, kReductionBlock);
    std::vector<NormalEquations> partial(blocks);
    detail::parallel_chunks(blocks, threads, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            Matrix7 h = Matrix7::Zero();
            Vector7 g = Vector7::Zero();
            const std::size_t hi = std::min(n, (b + 1) * kReductionBlock);
            for (std::size_t k = b * kReductionBlock; k < hi; ++k) {
                const double wk = weights[k];
                if (wk == 0.0) continue;
                const Eigen::Map<const Vector7> row(eval.jacobian.row(k).data());
                h.selfadjointView<Eigen::Lower>().rankUpdate(row, wk);
                g.noalias() += (wk * eval.report.residuals[k]) * row;
            }
            partial[b].jtwj = h.selfadjointView<Eigen::Lower>();
            partial[b].jtwr = g;
        }
    });
    NormalEquations total;
    for (const auto& p : partial) {
        total.jtwj += p.jtwj;
        total.jtwr += p.jtwr;
    }
    return total;
}

struct Bounds {
    Vector7 lower;
    Vector7 upper;
};

Bounds feasible_box(std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    Bounds b;
    b.lower.setConstant(-inf);
    b.upper.setConstant(inf);
    b.lower[index_of(Param::B)] = kMinB;
    b.lower[index_of(Param::m)] = kMinM;
    b.upper[index_of(Param::m)] = 1.0;
    b.lower[index_of(Param::T)] = project_to_feasible(LpplParams{0, 1, 0, 1, 0, 1, 0}, n).T;
    return b;
}

bool at_lower(const Vector7& p, const Bounds& box, int i) { return p[i] <= box.lower[i]; }
bool at_upper(const Vector7& p, const Bounds& box, int i) { return p[i] >= box.upper[i]; }

// Gradient with components removed where descent would leave the box.
Vector7 projected_gradient(const Vector7& g, const Vector7& p, const Bounds& box) {
    Vector7 out = g;
    for (int i = 0; i < 7; ++i) {
        if ((at_lower(p, box, i) && g[i] > 0.0) || (at_upper(p, box, i) && g[i] < 0.0)) out[i] = 0.0;
    }
    return out;
}

// Solves (J'WJ + mu diag(J'WJ)) delta = -J'W r over the free coordinates. A coordinate
// sitting on a bound whose step points outward is held fixed and the system re-solved.
// Zero diagonal entries (e.g. the omega and phi columns when C = 0) are floored
// relative to the largest one.
bool damped_step(const NormalEquations& ne, double mu, const Vector7& p, const Bounds& box, Vector7& delta) {
    Vector7 diag = ne.jtwj.diagonal();
    const double dmax = diag.maxCoeff();
    if (!(dmax > 0.0) || !std::isfinite(dmax)) return false;
    diag = diag.cwiseMax(dmax * 1e-12);
    std::array<bool, 7> fixed{};
    while (true) {
        Matrix7 lhs = ne.jtwj;
        lhs.diagonal() += mu * diag;
        Vector7 rhs = -ne.jtwr;
        for (int i = 0; i < 7; ++i) {
            if (!fixed[i]) continue;
            lhs.row(i).setZero();
            lhs.col(i).setZero();
            lhs(i, i) = 1.0;
            rhs[i] = 0.0;
        }
        Eigen::LLT<Matrix7> llt(lhs);
        if (llt.info() != Eigen::Success) return false;
        delta = llt.solve(rhs);
        if (!delta.allFinite()) return false;
        bool changed = false;
        for (int i = 0; i < 7; ++i) {
            if (fixed[i]) continue;
            if ((at_lower(p, box, i) && delta[i] < 0.0) || (at_upper(p, box, i) && delta[i] > 0.0)) {
                fixed[i] = true;
                changed = true;
            }
        }
        if (!changed) return true;
    }
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

void LmConfig::validate() const {
    if (!(mu_init > 0.0) || !(mu_bar > 0.0) || !(mu_bar_cap > 0.0)) {
        throw InputError("LM damping values must be positive");
    }
    if (mu_bar > mu_bar_cap) throw InputError("mu_bar must not exceed mu_bar_cap");
    if (!(mu_increase > 1.0) || !(mu_decrease > 1.0)) throw InputError("LM damping factors must exceed 1");
    if (stall_window == 0) throw InputError("stall_window must be at least 1");
}

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::iteration_cap: return "iteration-cap";
        case Termination::mu_exhausted: return "mu-exhausted";
        case Termination::restart_cap: return "restart-cap";
    }
    return "unknown";
}

RestartDecision restart_policy(double mu_bar, std::size_t restarts_so_far, const LmConfig& config) noexcept {
    if (restarts_so_far >= config.max_restarts) return {RestartDecision::Action::restart_cap, mu_bar};
    if (mu_bar >= config.mu_bar_cap) return {RestartDecision::Action::mu_exhausted, mu_bar};
    return {RestartDecision::Action::restart, std::min(2.0 * mu_bar, config.mu_bar_cap)};
}

LpplParams project_to_feasible(LpplParams p, std::size_t n) noexcept {
    const double nd = static_cast<double>(n);
    double t_min = nd + kBoundaryGap;
    while (t_min - nd < kBoundaryGap) t_min = std::nextafter(t_min, std::numeric_limits<double>::infinity());
    p.B = std::max(p.B, kMinB);
    p.m = std::clamp(p.m, kMinM, 1.0);
    p.T = std::max(p.T, t_min);
    return p;
}

FitResult lm_fit(const PriceSeries& series, const LpplParams& start, const LmConfig& config, std::size_t threads) {
    DampingState state = DampingState::initial(config);
    return lm_fit(series, start, config, threads, state);
}

FitResult lm_fit(const PriceSeries& series, const LpplParams& start, const LmConfig& config, std::size_t threads,
                 DampingState& state) {
    config.validate();
    validate_params(start, series.size());
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = series.size();
    const auto weights = series.weights();
    const Bounds box = feasible_box(n);

    FitResult out;
    out.params = start;
    BatchEvaluation current = evaluate_batch(start, series, threads);
    out.jacobian_evaluations = 1;
    double error = current.report.error;
    out.error_history.push_back(error);

    auto finish = [&](Termination reason) {
        out.termination = reason;
        out.error = error;
        out.average_error = error / static_cast<double>(series.degrees_of_freedom());
        out.wall_time = elapsed_seconds(t0);
        return out;
    };

    if (state.exhausted) return finish(state.exhausted_reason);

    while (true) {
        if (out.iterations >= config.max_iterations) return finish(Termination::iteration_cap);

        const NormalEquations ne = normal_equations(current, weights, threads);
        const Vector7 p = Eigen::Map<const Vector7>(out.params.to_array().data());
        if (projected_gradient(ne.jtwr, p, box).lpNorm<Eigen::Infinity>() < config.gradient_tol) {
            return finish(Termination::converged);
        }
        ++out.iterations;

        bool accepted = false;
        bool needs_restart = false;
        while (true) {
            if (!(state.mu >= std::numeric_limits<double>::min())) {
                needs_restart = true;  // mu underflowed
                break;
            }
            Vector7 delta;
            if (!damped_step(ne, state.mu, p, box, delta)) {
                needs_restart = true;  // singular damped normal matrix
                break;
            }
            const Vector7 raw = p + delta;
            const LpplParams candidate = project_to_feasible(LpplParams::from_array(
                                                                 std::span<const double, 7>(raw.data(), 7)),
                                                             n);
            const Vector7 c = Eigen::Map<const Vector7>(candidate.to_array().data());
            if ((c - p).norm() <= config.step_tol * (p.norm() + config.step_tol)) {
                return finish(Termination::converged);
            }

            double trial_error = std::numeric_limits<double>::infinity();
            try {
                ++out.residual_evaluations;
                trial_error = evaluate_residuals(candidate, series, threads).error;
            } catch (const DomainError&) {
                // rejected step
            }
            if (trial_error < error) {
                out.params = candidate;
                error = trial_error;
                state.mu /= config.mu_decrease;
                accepted = true;
                break;
            }
            state.mu *= config.mu_increase;
            if (!std::isfinite(state.mu)) {
                needs_restart = true;
                break;
            }
        }

        if (needs_restart) {
            const RestartDecision decision = restart_policy(state.mu_bar, state.restarts, config);
            if (decision.action != RestartDecision::Action::restart) {
                state.exhausted = true;
                state.exhausted_reason = decision.action == RestartDecision::Action::mu_exhausted
                                             ? Termination::mu_exhausted
                                             : Termination::restart_cap;
                return finish(state.exhausted_reason);
            }
            state.mu_bar = decision.mu_bar;
            state.mu = decision.mu_bar;
            ++state.restarts;
            ++out.restarts;
            out.mu_bar_history.push_back(decision.mu_bar);
            continue;
        }

        if (accepted) {
            out.error_history.push_back(error);
            current = evaluate_batch(out.params, series, threads);
            ++out.jacobian_evaluations;
            const auto& h = out.error_history;
            if (h.size() > config.stall_window) {
                const double before = h[h.size() - 1 - config.stall_window];
                if (before - error <= config.error_tol * before) return finish(Termination::converged);
            }
        }
    }
}

}  // namespace lppl

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "lppl/model.hpp"

namespace lppl {

/// Levenberg-Marquardt settings.
///
/// Within one run an accepted step divides mu by `mu_decrease` and a rejected step
/// multiplies it by `mu_increase`. When mu underflows to zero or the damped normal
/// matrix cannot be factored, the run restarts from the current iterate with
/// mu = mu_bar after mu_bar has been doubled (capped at `mu_bar_cap`).
struct LmConfig {
    double mu_init = 1e-3;
    double mu_bar = 1e-3;
    double mu_bar_cap = 1e6;
    /// Iteration bound for a single lm_fit call (the L bound when interleaving).
    std::size_t max_iterations = 2000;
    double gradient_tol = 1e-12;  ///< on ||J'W r||_inf
    double step_tol = 1e-12;      ///< on ||delta|| / (||p|| + step_tol)
    double error_tol = 1e-15;     ///< relative decrease of E over `stall_window` iterations
    std::size_t stall_window = 3;
    std::size_t max_restarts = 60;
    double mu_increase = 2.0;
    double mu_decrease = 3.0;

    /// Throws InputError on non-positive damping values or mu_bar > mu_bar_cap.
    void validate() const;
};

enum class Termination { converged, iteration_cap, mu_exhausted, restart_cap };

std::string_view to_string(Termination t) noexcept;

struct FitResult {
    LpplParams params;
    double error = 0.0;
    double average_error = 0.0;
    Termination termination = Termination::converged;
    std::size_t iterations = 0;
    std::size_t restarts = 0;
    double wall_time = 0.0;  ///< seconds
    std::size_t residual_evaluations = 0;  ///< residual-only passes over the series
    std::size_t jacobian_evaluations = 0;  ///< passes that also filled the Jacobian
    /// E of the start point followed by E of every accepted iterate.
    std::vector<double> error_history;
    /// mu_bar value used by each restart, in order.
    std::vector<double> mu_bar_history;
};

/// Damping carried between consecutive capped runs on the same fit.
struct DampingState {
    double mu = 0.0;
    double mu_bar = 0.0;
    std::size_t restarts = 0;
    /// Set once the restart policy has given up; later runs return immediately.
    bool exhausted = false;
    Termination exhausted_reason = Termination::mu_exhausted;

    static DampingState initial(const LmConfig& config) { return {config.mu_init, config.mu_bar, 0, false}; }
};

struct RestartDecision {
    enum class Action { restart, mu_exhausted, restart_cap };
    Action action = Action::restart;
    double mu_bar = 0.0;  ///< new mu_bar, which is also the initial mu of the restarted run
};

/// Restart rule: mu_bar <- min(2 mu_bar, cap). Gives up with mu_exhausted when mu_bar
/// is already at the cap, and with restart_cap once `restarts_so_far` reaches the limit.
RestartDecision restart_policy(double mu_bar, std::size_t restarts_so_far, const LmConfig& config) noexcept;

/// Clamps B, m and T into {B >= 1e-12, 1e-6 <= m <= 1, T >= n + kBoundaryGap}.
LpplParams project_to_feasible(LpplParams p, std::size_t n) noexcept;

inline constexpr double kMinB = 1e-12;
inline constexpr double kMinM = 1e-6;

/// Weighted LM fit of all seven parameters using the analytic Jacobian.
/// `start` must satisfy the parameter constraints for the series. Each trial point is
/// projected onto the feasible box; a coordinate resting on a bound whose step points
/// outward is held fixed for that step, and convergence uses the projected gradient.
FitResult lm_fit(const PriceSeries& series, const LpplParams& start, const LmConfig& config,
                 std::size_t threads = 1);

/// Resumable form: damping and restart bookkeeping live in `state` across calls.
FitResult lm_fit(const PriceSeries& series, const LpplParams& start, const LmConfig& config, std::size_t threads,
                 DampingState& state);

}  // namespace lppl

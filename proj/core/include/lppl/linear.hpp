#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lppl/model.hpp"
#include "lppl/solver.hpp"

namespace lppl {

/// The nonlinear coordinates held fixed by the linear sub-problem.
struct NonlinearPart {
    double T = 0.0;
    double m = 0.0;
    double omega = 0.0;
    double phi = 0.0;

    static NonlinearPart of(const LpplParams& p) noexcept { return {p.T, p.m, p.omega, p.phi}; }
};

/// Weighted least squares on (A, beta, gamma) for
///   ln p(i) ~ A - beta (T - i)^m - gamma (T - i)^m cos(omega ln(T - i) + phi)
/// with B = beta and C = gamma / beta.
struct LinearSolveResult {
    enum class Status { ok, rank_deficient, nonpositive_beta };

    Status status = Status::rank_deficient;
    double A = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double C = 0.0;
    /// E after substitution; only meaningful when status == ok.
    double error = 0.0;

    bool ok() const noexcept { return status == Status::ok; }
    LpplParams params(const NonlinearPart& fixed) const noexcept {
        return {A, beta, fixed.T, fixed.m, C, fixed.omega, fixed.phi};
    }
};

/// Solved by column-pivoted QR on the sqrt(w)-scaled design matrix with relative rank
/// threshold 1e-10. beta below kMinB is reported as nonpositive_beta.
LinearSolveResult solve_linear_subsystem(const PriceSeries& series, const NonlinearPart& fixed,
                                         std::size_t threads = 1);

/// One timed invocation of either solver: `iterations` is 0 for the linear solve.
struct Measurement {
    std::size_t iterations = 0;
    double cost = 0.0;
    double error_reduction = 0.0;
};

/// Run-time model cost = T1 * iterations + T0 for the LM solver.
struct RuntimeModel {
    double T0 = 0.0;
    double T1 = 0.0;
};

/// Fits the run-time model exactly through two measurements. Returns nullopt when the
/// iteration counts coincide or the implied per-iteration cost is negative.
std::optional<RuntimeModel> estimate_runtime_model(const Measurement& a, const Measurement& b) noexcept;

/// Adaptive choice of the LM iteration bound L.
///
/// Startup doubles L while the LM marginal error reduction per unit cost is at least
/// that of the linear solve, then switches to regime, where L moves by one toward the
/// solver with the larger rate (ties within 1% increase L).
struct InterleaveState {
    enum class Phase { startup, regime };

    std::size_t L = 5;
    Phase phase = Phase::startup;
    /// Last two LM measurements with distinct iteration counts (older first).
    std::optional<Measurement> lm_previous;
    std::optional<Measurement> lm_last;
    std::optional<RuntimeModel> model;
    std::optional<Measurement> linear_last;

    double lm_rate() const noexcept;
    double linear_rate() const noexcept;
};

/// Records the latest LM and linear measurements, re-estimates T0/T1 and returns the new L.
std::size_t update_L(InterleaveState& state, const Measurement& lm, const Measurement& linear);

enum class CostClock {
    wall,  ///< steady_clock seconds
    work,  ///< point evaluations performed; reproducible across runs
};

struct InterleaveConfig {
    LmConfig lm;
    bool linear = true;
    bool adaptive_L = false;
    std::size_t L = 5;
    /// Budget on LM iterations summed over all rounds.
    std::size_t max_total_iterations = 5000;
    /// A linear result replaces the incumbent only if E_lin < E (1 - min_relative_gain).
    double min_relative_gain = 1e-12;
    CostClock clock = CostClock::work;

    void validate() const;
};

struct InterleaveTrace {
    std::vector<std::size_t> L_history;
    std::size_t rounds = 0;
    std::size_t linear_accepted = 0;
    double linear_improvement = 0.0;  ///< total E removed by accepted linear solves
};

struct InterleaveResult {
    FitResult fit;
    InterleaveTrace trace;
};

/// Alternates L-capped LM runs with the linear solve at the LM iterate. Stops when the
/// linear solve fails to improve and LM has terminated on its own (converged or damping
/// exhausted), or when the total iteration budget is spent.
InterleaveResult interleave_fit(const PriceSeries& series, const LpplParams& seed, const InterleaveConfig& config,
                                std::size_t threads = 1);

}  // namespace lppl

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lppl/init.hpp"
#include "lppl/linear.hpp"
#include "lppl/model.hpp"
#include "lppl/solver.hpp"
#include "lppl/weights.hpp"

namespace lppl {

inline constexpr int kReportSchemaVersion = 1;

/// Thrown by fit_command when no (seed, scheme) combination produced a fit.
class AllFitsFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fit is called non-LPPL when m >= m_high, omega <= omega_low, or its average error
/// improves on the exponential baseline by less than min_error_reduction (fraction).
struct VerdictThresholds {
    double m_high = 0.95;
    double omega_low = 1.5;
    double min_error_reduction = 0.10;
};

struct Verdict {
    enum class Kind { lppl_bubble, non_lppl };
    Kind kind = Kind::non_lppl;
    std::vector<std::string> reasons;

    bool is_bubble() const noexcept { return kind == Kind::lppl_bubble; }
};

std::string_view to_string(Verdict::Kind k) noexcept;

Verdict classify(const LpplParams& best, double best_average_error, double baseline_average_error,
                 const VerdictThresholds& thresholds = {});
Verdict classify(const FitResult& best, double baseline_average_error, const VerdictThresholds& thresholds = {});

struct FitOptions {
    InterleaveConfig solver;
    SeedOptions seeds;
    std::vector<WeightScheme> schemes{WeightScheme::uniform()};
    VerdictThresholds thresholds;
    std::size_t jobs = 0;     ///< concurrent fits; 0 picks min(tasks, cores)
    std::size_t threads = 0;  ///< evaluation workers per fit; 0 picks max(1, cores / jobs)
};

struct RankedFit {
    std::size_t task = 0;  ///< position in the (scheme x seed) task list
    InitSeed seed;
    WeightScheme scheme;
    FitResult fit;
    InterleaveTrace trace;
};

struct FailedFit {
    std::size_t task = 0;
    std::string seed;
    WeightScheme scheme;
    std::string message;
};

struct Baseline {
    WeightScheme scheme;
    double error = 0.0;
    double average_error = 0.0;
};

struct RunReport {
    std::string source;
    std::size_t n = 0;
    std::size_t jobs = 0;
    std::size_t threads = 0;
    FitOptions options;
    std::vector<Baseline> baselines;
    std::vector<RankedFit> fits;  ///< ascending average error; fits.front() is the best
    std::vector<FailedFit> failures;
    std::vector<std::string> rejected_seeds;
    double best_baseline_average_error = 0.0;  ///< baseline under the best fit's scheme
    Verdict verdict;

    const RankedFit& best() const { return fits.front(); }
};

/// (jobs, threads) after resolving zeros against the core count.
std::pair<std::size_t, std::size_t> resolve_parallelism(std::size_t tasks, std::size_t jobs, std::size_t threads);

/// Fits every (scheme x seed) combination concurrently and ranks by average error.
/// `data` supplies the log prices; its weights are replaced by each scheme.
/// Throws AllFitsFailed when nothing converged to a valid fit.
RunReport fit_command(const PriceSeries& data, const FitOptions& options, const std::string& source = "");

/// Re-evaluates the best fit against the data and its weights; throws std::logic_error
/// if the stored error does not reproduce.
void check_report_consistency(const RunReport& report, const PriceSeries& data);

/// Stable JSON serialization. Wall-clock timings are included only on request so that
/// identical runs produce identical bytes.
std::string report_to_json(const RunReport& report, bool include_timings = false);

/// Ranked fits as CSV, one row per fit.
std::string report_to_csv(const RunReport& report);

/// index,log_price,fitted for external plotting.
void write_plot_csv(const std::filesystem::path& path, const PriceSeries& data, const LpplParams& best);

struct BenchRow {
    std::size_t threads = 1;
    double evaluate_seconds = 0.0;  ///< median over repetitions
    double evaluate_speedup = 1.0;
    double fit_seconds = 0.0;  ///< median capped lm_fit time
    double fit_speedup = 1.0;
    bool slower_than_previous = false;  ///< evaluate time rose versus the previous row
};

struct BenchOptions {
    std::size_t n = 100000;
    std::vector<std::size_t> threads{1, 2, 4, 8};
    std::size_t repetitions = 5;
    std::size_t fit_iterations = 20;
    std::uint64_t seed = 1;
};

/// Times evaluate_batch and a capped lm_fit on a synthetic base-shaped trace of length n
/// (critical time 1.1 n) at each thread count. Throws InputError for n < 1000.
std::vector<BenchRow> bench_command(const BenchOptions& options);

}  // namespace lppl

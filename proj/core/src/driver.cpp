#include "lppl/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "lppl/error.hpp"
#include "lppl/synth.hpp"

namespace lppl {
namespace {

using json = nlohmann::ordered_json;

json params_json(const LpplParams& p) {
    return {{"A", p.A}, {"B", p.B}, {"T", p.T}, {"m", p.m}, {"C", p.C}, {"omega", p.omega}, {"phi", p.phi}};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

template <typename Fn>
double time_seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Task {
    std::size_t scheme_index = 0;
    InitSeed seed;
};

}  // namespace

std::string_view to_string(Verdict::Kind k) noexcept {
    return k == Verdict::Kind::lppl_bubble ? "lppl-bubble" : "non-lppl";
}

Verdict classify(const LpplParams& best, double best_average_error, double baseline_average_error,
                 const VerdictThresholds& thresholds) {
    Verdict v;
    if (best.m >= thresholds.m_high) {
        std::ostringstream os;
        os << "m = " << best.m << " >= " << thresholds.m_high << " (nearly exponential growth)";
        v.reasons.push_back(os.str());
    }
    if (best.omega <= thresholds.omega_low) {
        std::ostringstream os;
        os << "omega = " << best.omega << " <= " << thresholds.omega_low << " (no meaningful log-periodicity)";
        v.reasons.push_back(os.str());
    }
    const double reduction =
        baseline_average_error > 0.0 ? 1.0 - best_average_error / baseline_average_error : 0.0;
    if (reduction < thresholds.min_error_reduction) {
        std::ostringstream os;
        os << "error reduction vs exponential fit " << reduction << " < " << thresholds.min_error_reduction;
        v.reasons.push_back(os.str());
    }
    v.kind = v.reasons.empty() ? Verdict::Kind::lppl_bubble : Verdict::Kind::non_lppl;
    if (v.is_bubble()) {
        std::ostringstream os;
        os << "m = " << best.m << ", omega = " << best.omega << ", error reduction " << reduction;
        v.reasons.push_back(os.str());
    }
    return v;
}

Verdict classify(const FitResult& best, double baseline_average_error, const VerdictThresholds& thresholds) {
    return classify(best.params, best.average_error, baseline_average_error, thresholds);
}

std::pair<std::size_t, std::size_t> resolve_parallelism(std::size_t tasks, std::size_t jobs, std::size_t threads) {
    const std::size_t cores = std::max(1u, std::thread::hardware_concurrency());
    if (jobs == 0) jobs = std::clamp<std::size_t>(tasks, 1, cores);
    if (threads == 0) threads = std::max<std::size_t>(1, cores / jobs);
    return {jobs, threads};
}

RunReport fit_command(const PriceSeries& data, const FitOptions& options, const std::string& source) {
    if (options.schemes.empty()) throw InputError("at least one weight scheme is required");
    options.solver.validate();

    RunReport report;
    report.source = source;
    report.n = data.size();
    report.options = options;

    std::vector<PriceSeries> weighted;
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < options.schemes.size(); ++s) {
        const WeightScheme& scheme = options.schemes[s];
        weighted.push_back(data.reweighted(build_weights(scheme, data.size())));
        const ExponentialFit baseline = exponential_prefit(weighted.back(), default_exponential_T(data.size()));
        report.baselines.push_back({scheme, baseline.error, baseline.average_error});

        SeedSet seeds = build_seed_set(weighted.back(), options.seeds);
        for (auto& msg : seeds.rejected) {
            if (std::find(report.rejected_seeds.begin(), report.rejected_seeds.end(), msg) ==
                report.rejected_seeds.end()) {
                report.rejected_seeds.push_back(std::move(msg));
            }
        }
        for (auto& seed : seeds.seeds) tasks.push_back({s, std::move(seed)});
    }

    const auto [jobs, threads] = resolve_parallelism(tasks.size(), options.jobs, options.threads);
    report.jobs = jobs;
    report.threads = threads;

    struct Outcome {
        std::optional<InterleaveResult> result;
        std::string error;
    };
    std::vector<Outcome> outcomes(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            try {
                outcomes[t].result =
                    interleave_fit(weighted[tasks[t].scheme_index], tasks[t].seed.params, options.solver, threads);
            } catch (const std::exception& e) {
                outcomes[t].error = e.what();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t j = 1; j < std::min(jobs, tasks.size()); ++j) pool.emplace_back(worker);
        worker();
    }

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const WeightScheme& scheme = options.schemes[tasks[t].scheme_index];
        if (outcomes[t].result) {
            report.fits.push_back({t, tasks[t].seed, scheme, outcomes[t].result->fit, outcomes[t].result->trace});
        } else {
            report.failures.push_back({t, tasks[t].seed.provenance.describe(), scheme, outcomes[t].error});
        }
    }
    if (report.fits.empty()) {
        std::string msg = "all " + std::to_string(tasks.size()) + " fits failed";
        if (!report.failures.empty()) msg += "; first error: " + report.failures.front().message;
        throw AllFitsFailed(msg);
    }
    std::stable_sort(report.fits.begin(), report.fits.end(), [](const RankedFit& a, const RankedFit& b) {
        if (a.fit.average_error != b.fit.average_error) return a.fit.average_error < b.fit.average_error;
        return a.task < b.task;
    });

    const RankedFit& best = report.best();
    for (const auto& b : report.baselines) {
        if (b.scheme == best.scheme) {
            report.best_baseline_average_error = b.average_error;
            break;
        }
    }
    report.verdict = classify(best.fit, report.best_baseline_average_error, options.thresholds);
    check_report_consistency(report, data);
    return report;
}

void check_report_consistency(const RunReport& report, const PriceSeries& data) {
    const RankedFit& best = report.best();
    const PriceSeries series = data.reweighted(build_weights(best.scheme, data.size()));
    const double recomputed = evaluate_residuals(best.fit.params, series, 1).error;
    const double stored = best.fit.error;
    if (std::abs(recomputed - stored) > 1e-9 * std::max(stored, 1e-300) + 1e-300) {
        std::ostringstream os;
        os << std::setprecision(17) << "best fit error " << stored << " does not reproduce (recomputed " << recomputed
           << ")";
        throw std::logic_error(os.str());
    }
    for (std::size_t r = 1; r < report.fits.size(); ++r) {
        if (report.fits[r].fit.average_error < best.fit.average_error) {
            throw std::logic_error("report ranking is not ascending in average error");
        }
    }
}

std::string report_to_json(const RunReport& report, bool include_timings) {
    const FitOptions& o = report.options;
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["source"] = report.source;
    j["n"] = report.n;
    j["degrees_of_freedom"] = report.n - kParamCount;
    j["config"] = {
        {"jobs", report.jobs},
        {"threads", report.threads},
        {"weights", [&] {
             json w = json::array();
             for (const auto& s : o.schemes) w.push_back(s.to_string());
             return w;
         }()},
        {"interleave", o.solver.linear},
        {"L", o.solver.L},
        {"adaptive_L", o.solver.adaptive_L},
        {"cost_clock", o.solver.clock == CostClock::wall ? "wall" : "work"},
        {"max_total_iterations", o.solver.max_total_iterations},
        {"auto_triples", o.seeds.auto_triples},
        {"extremum_window", o.seeds.extremum_window},
        {"lm",
         {{"mu_init", o.solver.lm.mu_init},
          {"mu_bar", o.solver.lm.mu_bar},
          {"mu_bar_cap", o.solver.lm.mu_bar_cap},
          {"gradient_tol", o.solver.lm.gradient_tol},
          {"step_tol", o.solver.lm.step_tol},
          {"error_tol", o.solver.lm.error_tol},
          {"max_restarts", o.solver.lm.max_restarts}}},
    };

    json baselines = json::array();
    for (const auto& b : report.baselines) {
        baselines.push_back({{"weights", b.scheme.to_string()}, {"error", b.error}, {"average_error", b.average_error}});
    }
    j["exponential_baseline"] = baselines;

    json fits = json::array();
    for (std::size_t r = 0; r < report.fits.size(); ++r) {
        const RankedFit& f = report.fits[r];
        json item = {
            {"rank", r + 1},
            {"seed", f.seed.provenance.describe()},
            {"weights", f.scheme.to_string()},
            {"start", params_json(f.seed.params)},
            {"params", params_json(f.fit.params)},
            {"error", f.fit.error},
            {"average_error", f.fit.average_error},
            {"termination", to_string(f.fit.termination)},
            {"iterations", f.fit.iterations},
            {"restarts", f.fit.restarts},
            {"linear_accepted", f.trace.linear_accepted},
        };
        if (include_timings) item["wall_time"] = f.fit.wall_time;
        fits.push_back(std::move(item));
    }
    j["fits"] = fits;

    json failures = json::array();
    for (const auto& f : report.failures) {
        failures.push_back({{"seed", f.seed}, {"weights", f.scheme.to_string()}, {"error", f.message}});
    }
    j["failures"] = failures;
    j["rejected_seeds"] = report.rejected_seeds;

    const RankedFit& best = report.best();
    j["best"] = {{"rank", 1},
                 {"seed", best.seed.provenance.describe()},
                 {"weights", best.scheme.to_string()},
                 {"params", params_json(best.fit.params)},
                 {"error", best.fit.error},
                 {"average_error", best.fit.average_error},
                 {"exponential_average_error", report.best_baseline_average_error}};
    j["verdict"] = {{"kind", to_string(report.verdict.kind)},
                    {"reasons", report.verdict.reasons},
                    {"thresholds",
                     {{"m_high", o.thresholds.m_high},
                      {"omega_low", o.thresholds.omega_low},
                      {"min_error_reduction", o.thresholds.min_error_reduction}}}};
    return j.dump(2) + "\n";
}

std::string report_to_csv(const RunReport& report) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "rank,seed,weights,A,B,T,m,C,omega,phi,error,average_error,termination,iterations,restarts\n";
    for (std::size_t r = 0; r < report.fits.size(); ++r) {
        const RankedFit& f = report.fits[r];
        const auto& p = f.fit.params;
        os << (r + 1) << ",\"" << f.seed.provenance.describe() << "\"," << f.scheme.to_string() << ',' << p.A << ','
           << p.B << ',' << p.T << ',' << p.m << ',' << p.C << ',' << p.omega << ',' << p.phi << ',' << f.fit.error
           << ',' << f.fit.average_error << ',' << to_string(f.fit.termination) << ',' << f.fit.iterations << ','
           << f.fit.restarts << '\n';
    }
    return os.str();
}

void write_plot_csv(const std::filesystem::path& path, const PriceSeries& data, const LpplParams& best) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    out << "index,log_price,fitted\n" << std::setprecision(17);
    const auto logp = data.log_prices();
    for (std::size_t k = 0; k < logp.size(); ++k) {
        out << (k + 1) << ',' << logp[k] << ',' << lppl_value(best, static_cast<double>(k + 1)) << '\n';
    }
}

std::vector<BenchRow> bench_command(const BenchOptions& options) {
    if (options.n < 1000) throw InputError("bench requires n >= 1000");
    if (options.threads.empty() || options.repetitions == 0) throw InputError("bench needs thread counts and repetitions");

    SynthSpec spec;
    spec.n = options.n;
    spec.seed = options.seed;
    spec.sigma = 0.005;
    spec.params = {5.0, 0.02, 1.1 * static_cast<double>(options.n), 0.68, 0.05, 9.0, 0.0};
    const PriceSeries series = generate_trace(spec);
    LpplParams start = spec.params;
    start.B *= 1.01;
    start.m *= 0.99;
    start.omega *= 1.01;

    LmConfig lm;
    lm.max_iterations = options.fit_iterations;

    std::vector<BenchRow> rows;
    for (std::size_t threads : options.threads) {
        BenchRow row;
        row.threads = std::max<std::size_t>(threads, 1);
        std::vector<double> eval_times, fit_times;
        for (std::size_t r = 0; r < options.repetitions; ++r) {
            eval_times.push_back(time_seconds([&] { (void)evaluate_batch(start, series, row.threads); }));
            fit_times.push_back(time_seconds([&] { (void)lm_fit(series, start, lm, row.threads); }));
        }
        row.evaluate_seconds = median(eval_times);
        row.fit_seconds = median(fit_times);
        rows.push_back(row);
    }
    const auto baseline = std::find_if(rows.begin(), rows.end(), [](const BenchRow& r) { return r.threads == 1; });
    const BenchRow& ref = baseline != rows.end() ? *baseline : rows.front();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r].evaluate_speedup = ref.evaluate_seconds / rows[r].evaluate_seconds;
        rows[r].fit_speedup = ref.fit_seconds / rows[r].fit_seconds;
        rows[r].slower_than_previous = r > 0 && rows[r].evaluate_seconds > rows[r - 1].evaluate_seconds;
    }
    return rows;
}

}  // namespace lppl

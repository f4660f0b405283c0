// lppl: fit, synth, bench and classify subcommands over the lppl core library.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "lppl/lppl.hpp"

namespace {

constexpr int kExitInputError = 2;
constexpr int kExitAllFitsFailed = 3;

struct GlobalOptions {
    std::size_t jobs = 0;
    std::size_t threads = 0;
    std::uint64_t seed_rng = 1;
    std::string out;
    std::string format = "json";
};

struct FitArgs {
    std::string data;
    std::string column;
    std::vector<std::string> weights{"uniform"};
    std::vector<std::string> triples;
    std::size_t auto_triples = 8;
    std::size_t extremum_window = lppl::kDefaultExtremumWindow;
    std::string interleave = "on";
    std::size_t L = 5;
    std::string adaptive_L = "off";
    std::string cost_clock = "work";
    std::size_t max_iterations = 5000;
    lppl::LmConfig lm;
    lppl::VerdictThresholds thresholds;
    std::string plot;
    bool timings = false;
};

struct SynthArgs {
    std::string preset;
    std::optional<std::uint64_t> seed;
    lppl::LpplParams params{5.0, 0.02, 1100.0, 0.68, 0.05, 9.0, 0.0};
    double sigma = 0.005;
    std::size_t n = 1000;
};

struct BenchArgs {
    lppl::BenchOptions options;
};

struct ClassifyArgs {
    std::string report;
    std::optional<double> m;
    std::optional<double> omega;
    std::optional<double> average_error;
    std::optional<double> baseline_error;
    lppl::VerdictThresholds thresholds;
};

bool on_off(const std::string& v) { return v == "on"; }

void emit(const GlobalOptions& g, const std::string& text) {
    if (g.out.empty() || g.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out);
    if (!f) throw lppl::InputError("cannot open '" + g.out + "' for writing");
    f << text;
}

int run_fit(const GlobalOptions& g, const FitArgs& a) {
    const auto column = a.column.empty() ? lppl::ColumnSpec{} : lppl::ColumnSpec::parse(a.column);
    const lppl::RawSeries raw = lppl::load_csv(a.data, column);
    for (const auto& w : raw.warnings) std::cerr << "warning: " << w << '\n';
    const lppl::PriceSeries data = lppl::to_series(raw, lppl::WeightScheme::uniform());

    lppl::FitOptions options;
    options.jobs = g.jobs;
    options.threads = g.threads;
    options.thresholds = a.thresholds;
    options.schemes.clear();
    for (const auto& w : a.weights) {
        options.schemes.push_back(lppl::WeightScheme::parse(w));
        lppl::validate_scheme(options.schemes.back(), data.size());
    }
    for (const auto& t : a.triples) options.seeds.manual.push_back(lppl::Triple::parse(t));
    // Manual triples bypass detection entirely.
    options.seeds.auto_triples = a.triples.empty() ? a.auto_triples : 0;
    options.seeds.extremum_window = a.extremum_window;
    options.solver.lm = a.lm;
    options.solver.linear = on_off(a.interleave);
    options.solver.L = a.L;
    options.solver.adaptive_L = on_off(a.adaptive_L);
    options.solver.clock = a.cost_clock == "wall" ? lppl::CostClock::wall : lppl::CostClock::work;
    options.solver.max_total_iterations = a.max_iterations;

    const lppl::RunReport report = lppl::fit_command(data, options, raw.source);
    for (const auto& r : report.rejected_seeds) std::cerr << "seed rejected: " << r << '\n';
    for (const auto& f : report.failures) std::cerr << "fit failed (" << f.seed << "): " << f.message << '\n';

    emit(g, g.format == "csv" ? lppl::report_to_csv(report) : lppl::report_to_json(report, a.timings));
    if (!a.plot.empty()) lppl::write_plot_csv(a.plot, data, report.best().fit.params);
    return 0;
}

int run_synth(const GlobalOptions& g, const SynthArgs& a) {
    lppl::SynthSpec spec;
    std::optional<lppl::Preset> preset;
    const std::uint64_t seed = a.seed.value_or(g.seed_rng);
    if (!a.preset.empty()) {
        preset = lppl::parse_preset(a.preset);
        spec = lppl::preset_spec(*preset, seed);
    } else {
        spec.params = a.params;
        spec.sigma = a.sigma;
        spec.n = a.n;
        spec.seed = seed;
    }
    const lppl::PriceSeries series = lppl::generate_trace(spec);
    if (g.out.empty() || g.out == "-") {
        std::cout << "index,log_price,price\n" << std::setprecision(17);
        const auto logp = series.log_prices();
        for (std::size_t k = 0; k < logp.size(); ++k) {
            std::cout << (k + 1) << ',' << logp[k] << ',' << std::exp(logp[k]) << '\n';
        }
        std::cerr << lppl::spec_to_json(spec, preset) << '\n';
        return 0;
    }
    lppl::write_trace_csv(g.out, series);
    std::ofstream sidecar(g.out + ".json");
    sidecar << lppl::spec_to_json(spec, preset) << '\n';
    return 0;
}

int run_bench(const GlobalOptions& g, BenchArgs a) {
    a.options.seed = g.seed_rng;
    const auto rows = lppl::bench_command(a.options);
    std::ostringstream os;
    if (g.format == "csv") {
        os << "threads,evaluate_seconds,evaluate_speedup,fit_seconds,fit_speedup,slower_than_previous\n";
        for (const auto& r : rows) {
            os << r.threads << ',' << r.evaluate_seconds << ',' << r.evaluate_speedup << ',' << r.fit_seconds << ','
               << r.fit_speedup << ',' << (r.slower_than_previous ? 1 : 0) << '\n';
        }
    } else {
        nlohmann::ordered_json j;
        j["n"] = a.options.n;
        j["repetitions"] = a.options.repetitions;
        j["hardware_concurrency"] = std::thread::hardware_concurrency();
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            j["rows"].push_back({{"threads", r.threads},
                                 {"evaluate_seconds", r.evaluate_seconds},
                                 {"evaluate_speedup", r.evaluate_speedup},
                                 {"fit_seconds", r.fit_seconds},
                                 {"fit_speedup", r.fit_speedup},
                                 {"slower_than_previous", r.slower_than_previous}});
        }
        os << j.dump(2) << '\n';
    }
    emit(g, os.str());
    return 0;
}

int run_classify(const GlobalOptions& g, ClassifyArgs a) {
    if (!a.report.empty()) {
        std::ifstream in(a.report);
        if (!in) throw lppl::InputError("cannot open report '" + a.report + "'");
        nlohmann::json j;
        try {
            in >> j;
            const auto& best = j.at("best");
            a.m = a.m.value_or(best.at("params").at("m").get<double>());
            a.omega = a.omega.value_or(best.at("params").at("omega").get<double>());
            a.average_error = a.average_error.value_or(best.at("average_error").get<double>());
            a.baseline_error = a.baseline_error.value_or(best.at("exponential_average_error").get<double>());
        } catch (const nlohmann::json::exception& e) {
            throw lppl::InputError("malformed report '" + a.report + "': " + e.what());
        }
    }
    if (!a.m || !a.omega || !a.average_error || !a.baseline_error) {
        throw lppl::InputError("classify needs --report or all of --m, --omega, --average-error, --baseline-error");
    }
    lppl::LpplParams p;
    p.m = *a.m;
    p.omega = *a.omega;
    const lppl::Verdict v = lppl::classify(p, *a.average_error, *a.baseline_error, a.thresholds);
    nlohmann::ordered_json j;
    j["verdict"] = lppl::to_string(v.kind);
    j["reasons"] = v.reasons;
    j["thresholds"] = {{"m_high", a.thresholds.m_high},
                       {"omega_low", a.thresholds.omega_low},
                       {"min_error_reduction", a.thresholds.min_error_reduction}};
    emit(g, j.dump(2) + "\n");
    return 0;
}

void add_threshold_flags(CLI::App* cmd, lppl::VerdictThresholds& t) {
    cmd->add_option("--m-high", t.m_high, "non-LPPL when m >= this")->capture_default_str();
    cmd->add_option("--omega-low", t.omega_low, "non-LPPL when omega <= this")->capture_default_str();
    cmd->add_option("--min-error-reduction", t.min_error_reduction,
                    "non-LPPL when 1 - E_lppl/E_exp is below this fraction")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Log-periodic power law fitting for asset-price series"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file whose keys are long option names");

    GlobalOptions g;
    app.add_option("--jobs", g.jobs, "concurrent fits (0 = auto)");
    app.add_option("--threads", g.threads, "evaluation threads per fit (0 = auto)");
    app.add_option("--seed-rng", g.seed_rng, "RNG seed for synthetic traces")->capture_default_str();
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit LPPL to a price CSV from multiple seeds");
    fit_cmd->fallthrough();
    fit_cmd->add_option("--data", fit.data, "price CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--column", fit.column, "close column by header name or 0-based position");
    fit_cmd->add_option("--weights", fit.weights, "uniform | step:s,t | quad:W (repeatable)")->capture_default_str();
    fit_cmd->add_option("--triple", fit.triples, "i,j,k[,peak|trough] seed triple (repeatable)");
    fit_cmd->add_option("--auto-triples", fit.auto_triples, "max detected extremum triples")->capture_default_str();
    fit_cmd->add_option("--extremum-window", fit.extremum_window, "extremum detection half-width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_option("--interleave", fit.interleave, "interleave linear sub-system solves")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    fit_cmd->add_option("--L", fit.L, "LM iterations per interleave round")->check(CLI::PositiveNumber)->capture_default_str();
    fit_cmd->add_option("--adaptive-L", fit.adaptive_L, "adapt L from measured error reduction rates")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    fit_cmd->add_option("--cost-clock", fit.cost_clock, "cost measure for adaptive L")
        ->check(CLI::IsMember({"work", "wall"}))
        ->capture_default_str();
    fit_cmd->add_option("--max-iterations", fit.max_iterations, "total LM iteration budget per fit")->capture_default_str();
    fit_cmd->add_option("--mu-init", fit.lm.mu_init, "initial damping")->capture_default_str();
    fit_cmd->add_option("--mu-bar", fit.lm.mu_bar, "restart damping seed")->capture_default_str();
    fit_cmd->add_option("--mu-bar-cap", fit.lm.mu_bar_cap, "upper bound on the restart damping")->capture_default_str();
    fit_cmd->add_option("--gradient-tol", fit.lm.gradient_tol)->capture_default_str();
    fit_cmd->add_option("--step-tol", fit.lm.step_tol)->capture_default_str();
    fit_cmd->add_option("--error-tol", fit.lm.error_tol)->capture_default_str();
    fit_cmd->add_option("--max-restarts", fit.lm.max_restarts)->capture_default_str();
    add_threshold_flags(fit_cmd, fit.thresholds);
    fit_cmd->add_option("--plot", fit.plot, "write index,log_price,fitted CSV here");
    fit_cmd->add_flag("--timings", fit.timings, "include wall-clock times in the JSON report");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic LPPL + Brownian trace");
    synth_cmd->fallthrough();
    synth_cmd->add_option("--preset", synth.preset, "base | oscillatory | exponential");
    synth_cmd->add_option("--seed", synth.seed, "RNG seed (defaults to --seed-rng)");
    synth_cmd->add_option("--A", synth.params.A)->capture_default_str();
    synth_cmd->add_option("--B", synth.params.B)->capture_default_str();
    synth_cmd->add_option("--T", synth.params.T)->capture_default_str();
    synth_cmd->add_option("--m", synth.params.m)->capture_default_str();
    synth_cmd->add_option("--C", synth.params.C)->capture_default_str();
    synth_cmd->add_option("--omega", synth.params.omega)->capture_default_str();
    synth_cmd->add_option("--phi", synth.params.phi)->capture_default_str();
    synth_cmd->add_option("--sigma", synth.sigma)->capture_default_str();
    synth_cmd->add_option("--n", synth.n)->capture_default_str();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "time parallel evaluation at several thread counts");
    bench_cmd->fallthrough();
    bench_cmd->add_option("--n", bench.options.n, "trace length")->capture_default_str();
    bench_cmd->add_option("--thread-counts", bench.options.threads, "thread counts to time")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--repetitions", bench.options.repetitions)->capture_default_str();
    bench_cmd->add_option("--fit-iterations", bench.options.fit_iterations)->capture_default_str();

    ClassifyArgs cls;
    auto* classify_cmd = app.add_subcommand("classify", "bubble / non-bubble verdict for a fit");
    classify_cmd->fallthrough();
    classify_cmd->add_option("--report", cls.report, "JSON report written by fit");
    classify_cmd->add_option("--m", cls.m);
    classify_cmd->add_option("--omega", cls.omega);
    classify_cmd->add_option("--average-error", cls.average_error);
    classify_cmd->add_option("--baseline-error", cls.baseline_error, "exponential fit average error");
    add_threshold_flags(classify_cmd, cls.thresholds);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInputError;
    }

    try {
        if (*fit_cmd) return run_fit(g, fit);
        if (*synth_cmd) return run_synth(g, synth);
        if (*bench_cmd) return run_bench(g, bench);
        if (*classify_cmd) return run_classify(g, cls);
    } catch (const lppl::AllFitsFailed& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAllFitsFailed;
    } catch (const lppl::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const lppl::DomainError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

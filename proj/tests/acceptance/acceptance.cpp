// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero when an
// asserted criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lppl/lppl.hpp"
#include "oracles.hpp"

using namespace lppl;

namespace {

constexpr std::uint64_t kMasterSeed = 2024;
constexpr std::size_t kRestartCap = 60;

struct Outcome {
    int id;
    std::string name;
    bool pass;
    bool asserted = true;
    std::string detail;
};

std::vector<Outcome> outcomes;
std::vector<FitResult> monitored;  // every fit from criteria 3 to 7

void record(int id, std::string name, bool pass, std::string detail, bool asserted = true) {
    const Outcome o{id, std::move(name), pass, asserted, std::move(detail)};
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << o.id << "] " << o.name << ": " << o.detail
              << (o.asserted ? "" : " (not asserted)") << std::endl;
    outcomes.push_back(o);
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

void monitor(const RunReport& report) {
    for (const auto& f : report.fits) monitored.push_back(f.fit);
}

std::filesystem::path fixture() { return std::filesystem::path(LPPL_TEST_DATA_DIR) / "sp500_2003_2007.csv"; }

FitOptions multistart() {
    FitOptions o;
    o.seeds.auto_triples = 8;
    return o;
}

void jacobian_correctness() {
    Stopwatch clock;
    std::mt19937_64 rng(kMasterSeed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double n = 1000.0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const LpplParams p{1.0 + 9.0 * u(rng), 1e-3 + u(rng), n + 1.0 + 500.0 * u(rng), 0.05 + 0.95 * u(rng),
                           -0.5 + u(rng),       2.0 + 18.0 * u(rng), 2.0 * std::numbers::pi * u(rng)};
        for (int s = 0; s < 100; ++s) {
            const double x = 1.0 + (n - 1.0) * u(rng);
            const auto row = lppl_jacobian_row(p, x);
            const long double floor = 1e-9L * (1.0L + std::fabs(oracle::lppl(oracle::widen(p), x)));
            for (std::size_t k = 0; k < kParamCount; ++k) {
                const long double fd = oracle::central_difference(p, x, k);
                const long double diff = std::fabs(row[k] - fd);
                if (diff <= floor) continue;
                worst = std::max(worst, static_cast<double>(diff / std::fabs(fd)));
            }
        }
    }
    const double secs = clock.seconds();
    record(1, "Jacobian vs central differences", worst < 1e-5 && secs < 5.0,
           "worst relative " + fmt(worst) + ", " + fmt(secs, 3) + " s");
}

void initialization_example() {
    std::vector<double> y(1000);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 4.0 + 3.5e-4 * static_cast<double>(i + 1);
    const auto series = PriceSeries::with_uniform_weights(y);
    const auto seed = triple_to_seed({718, 916, 988, ExtremumKind::peak}, series);
    const double rho = 198.0 / 72.0;
    const double rho_from_seed = std::exp(2.0 * std::numbers::pi / seed.params.omega);
    const bool ok = rho == 2.75 && std::fabs(rho_from_seed - 2.75) < 1e-12 &&
                    std::fabs(seed.params.T - 1029.14) <= 0.01 && std::fabs(seed.params.omega - 6.21) <= 0.01 &&
                    std::fabs(seed.params.phi + 19.95) <= 0.01;
    record(2, "initialization from triple (718, 916, 988)", ok,
           "rho " + fmt(rho_from_seed, 10) + ", T " + fmt(seed.params.T, 7) + ", omega " + fmt(seed.params.omega, 5) +
               ", phi " + fmt(seed.params.phi, 6));
}

void noiseless_recovery() {
    bool all = true;
    std::string detail;
    for (Preset preset : {Preset::base, Preset::oscillatory, Preset::exponential}) {
        SynthSpec spec = preset_spec(preset, kMasterSeed);
        spec.sigma = 0.0;
        const auto series = generate_trace(spec);
        auto start = spec.params.to_array();
        for (std::size_t k = 0; k < kParamCount; ++k) start[k] *= (k % 2 == 0) ? 1.01 : 0.99;
        const LpplParams seed = project_to_feasible(LpplParams::from_array(start), series.size());

        Stopwatch clock;
        const auto r = interleave_fit(series, seed, InterleaveConfig{});
        const double secs = clock.seconds();
        monitored.push_back(r.fit);

        const auto truth = spec.params.to_array();
        const auto got = r.fit.params.to_array();
        double worst = 0.0;
        for (std::size_t k = 0; k < kParamCount; ++k) {
            const double scale = truth[k] != 0.0 ? std::fabs(truth[k]) : 1.0;
            worst = std::max(worst, std::fabs(got[k] - truth[k]) / scale);
        }
        const bool ok = worst <= 1e-4 && r.fit.error < 1e-15 && secs < 10.0;
        all = all && ok;
        detail += std::string(to_string(preset)) + " worst relative " + fmt(worst) + " E " + fmt(r.fit.error) + " " +
                  fmt(secs, 3) + " s" + (ok ? "" : " (miss)") + "; ";
    }
    record(3, "noiseless recovery from perturbed truth", all, detail);
}

void linear_exactness() {
    SynthSpec spec = preset_spec(Preset::base, kMasterSeed);
    spec.sigma = 0.0;
    const auto series = generate_trace(spec);
    const auto fixed = NonlinearPart::of(spec.params);
    const auto lin = solve_linear_subsystem(series, fixed);
    if (!lin.ok()) {
        record(4, "linear sub-system exactness", false, "solve rejected");
        return;
    }
    const double worst = std::max({std::fabs(lin.A - 5.0) / 5.0, std::fabs(lin.beta - 0.02) / 0.02,
                                   std::fabs(lin.C - 0.05) / 0.05});
    const auto again = solve_linear_subsystem(series, NonlinearPart::of(lin.params(fixed)));
    const double drift = std::max({std::fabs(again.A - lin.A) / std::fabs(lin.A),
                                   std::fabs(again.beta - lin.beta) / std::fabs(lin.beta),
                                   std::fabs(again.C - lin.C) / std::fabs(lin.C)});
    record(4, "linear sub-system exactness", again.ok() && worst <= 1e-10 && drift <= 1e-12,
           "worst relative " + fmt(worst) + ", idempotence drift " + fmt(drift));
}

struct PresetRuns {
    std::vector<RunReport> reports;
    double seconds = 0.0;
};

PresetRuns run_preset(Preset preset) {
    PresetRuns runs;
    Stopwatch clock;
    for (std::size_t r = 0; r < 5; ++r) {
        const auto series = generate_trace(preset_spec(preset, derive_seed(kMasterSeed, preset, r)));
        runs.reports.push_back(fit_command(series, multistart(), std::string(to_string(preset))));
        monitor(runs.reports.back());
    }
    runs.seconds = clock.seconds();
    return runs;
}

void discrimination_and_bias() {
    const auto base = run_preset(Preset::base);
    const auto expo = run_preset(Preset::exponential);
    const auto osc = run_preset(Preset::oscillatory);

    auto count = [](const PresetRuns& runs, Verdict::Kind kind) {
        return std::count_if(runs.reports.begin(), runs.reports.end(),
                             [&](const RunReport& r) { return r.verdict.kind == kind; });
    };
    const auto expo_non = count(expo, Verdict::Kind::non_lppl);
    const auto base_bubble = count(base, Verdict::Kind::lppl_bubble);
    const double secs5 = base.seconds + expo.seconds;
    record(5, "bubble discrimination", expo_non >= 4 && base_bubble >= 4 && secs5 < 120.0,
           "exponential non-lppl " + std::to_string(expo_non) + "/5, base bubble " + std::to_string(base_bubble) +
               "/5, " + fmt(secs5, 3) + " s");

    auto mean_T = [](const PresetRuns& runs, std::string& listing) {
        double sum = 0.0;
        for (const auto& r : runs.reports) {
            sum += r.best().fit.params.T;
            listing += fmt(r.best().fit.params.T, 6) + " ";
        }
        return sum / static_cast<double>(runs.reports.size());
    };
    std::string base_list, osc_list;
    const double base_T = mean_T(base, base_list);
    const double osc_T = mean_T(osc, osc_list);
    const double secs6 = base.seconds + osc.seconds;
    record(6, "critical-time bias direction", base_T > 1100.0 && osc_T < 1100.0 && secs6 < 300.0,
           "base mean T " + fmt(base_T, 6) + " [" + base_list + "], oscillatory mean T " + fmt(osc_T, 6) + " [" +
               osc_list + "], " + fmt(secs6, 3) + " s");
}

void historical_fit() {
    if (!std::filesystem::exists(fixture())) {
        std::cout << "WARNING: S&P 500 fixture missing, criterion 7 skipped" << std::endl;
        record(7, "historical S&P 500 fit", true, "skipped, fixture unavailable", false);
        return;
    }
    const auto series = to_series(load_csv(fixture()), WeightScheme::uniform());
    auto options = multistart();
    options.seeds.manual = {{718, 916, 988, ExtremumKind::peak}};
    const auto report = fit_command(series, options, fixture().filename().string());
    monitor(report);
    const auto& best = report.best().fit;
    const double baseline = report.best_baseline_average_error;
    const bool error_ok = best.average_error <= 7.2e-4;
    const bool baseline_ok = std::fabs(baseline - 9.0e-4) <= 0.05 * 9.0e-4;
    const bool T_ok = best.params.T >= 1090.0 && best.params.T <= 1120.0;
    record(7, "historical S&P 500 fit", error_ok && baseline_ok && T_ok,
           "best average error " + fmt(best.average_error) + (error_ok ? "" : " (miss)") + ", baseline " +
               fmt(baseline) + (baseline_ok ? "" : " (miss)") + ", T " + fmt(best.params.T, 6) +
               (T_ok ? "" : " (outside [1090, 1120])") + ", m " + fmt(best.params.m) + ", omega " +
               fmt(best.params.omega) + ", seed " + report.best().seed.provenance.describe());
}

void parallel_speedup() {
    const unsigned cores = std::thread::hardware_concurrency();
    BenchOptions o;
    o.n = 100000;
    o.threads = {1, 4};
    o.repetitions = 5;
    o.fit_iterations = 1;
    const auto rows = bench_command(o);
    const double speedup = rows.back().evaluate_speedup;
    record(8, "evaluate_batch speedup at 4 threads", speedup >= 2.0,
           "speedup " + fmt(speedup, 3) + " on " + std::to_string(cores) + " hardware threads", cores >= 4);
}

void monotone_and_termination() {
    std::size_t bad_history = 0, capped = 0;
    for (const auto& f : monitored) {
        for (std::size_t k = 1; k < f.error_history.size(); ++k) {
            if (f.error_history[k] > f.error_history[k - 1]) {
                ++bad_history;
                break;
            }
        }
        if (f.termination == Termination::restart_cap || f.restarts >= kRestartCap) ++capped;
    }
    record(9, "monotone error and termination", bad_history == 0 && capped == 0 && !monitored.empty(),
           std::to_string(monitored.size()) + " fits, " + std::to_string(bad_history) + " non-monotone, " +
               std::to_string(capped) + " at the restart cap");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "lppl_acceptance";
    std::filesystem::create_directories(dir);
    std::filesystem::path data = fixture();
    if (!std::filesystem::exists(data)) {
        data = dir / "trace.csv";
        write_trace_csv(data, generate_trace(preset_spec(Preset::base, kMasterSeed)));
    }
    std::string first, second, how;
#ifdef LPPL_CLI_PATH
    auto run = [&](const std::filesystem::path& out) {
        const std::string cmd = std::string("\"") + LPPL_CLI_PATH + "\" --jobs 2 --threads 2 --out \"" + out.string() +
                                "\" fit --data \"" + data.string() + "\" --triple 718,916,988";
        return std::system(cmd.c_str());
    };
    const int a = run(dir / "a.json");
    const int b = run(dir / "b.json");
    if (a != 0 || b != 0) {
        record(10, "byte-identical fit reports", false, "CLI exited with " + std::to_string(a) + "/" + std::to_string(b));
        return;
    }
    first = slurp(dir / "a.json");
    second = slurp(dir / "b.json");
    how = "two CLI runs";
#else
    const auto series = to_series(load_csv(data), WeightScheme::uniform());
    FitOptions o = multistart();
    o.jobs = 2;
    o.threads = 2;
    first = report_to_json(fit_command(series, o, data.filename().string()));
    second = report_to_json(fit_command(series, o, data.filename().string()));
    how = "two library runs";
#endif
    std::filesystem::remove_all(dir);
    record(10, "byte-identical fit reports", !first.empty() && first == second,
           how + ", " + std::to_string(first.size()) + " bytes");
}

}  // namespace

int main() {
    try {
        jacobian_correctness();
        initialization_example();
        noiseless_recovery();
        linear_exactness();
        discrimination_and_bias();
        historical_fit();
        parallel_speedup();
        monotone_and_termination();
        determinism();
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
        return 1;
    }
    std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
    std::size_t failed = 0;
    for (const auto& o : outcomes) failed += (o.asserted && !o.pass) ? 1 : 0;
    std::cout << (failed == 0 ? "all asserted criteria passed" : std::to_string(failed) + " asserted criteria failed")
              << std::endl;
    return failed == 0 ? 0 : 1;
}

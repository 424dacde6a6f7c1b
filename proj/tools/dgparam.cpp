// dgparam: simulate the generator model, fit its parameters to measured
// load-step tests, inspect identifiability, run the benchmark cases.
//
// Exit codes: 0 converged (or success), 2 finished without convergence,
// 1 error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dgparam/benchmark.hpp"
#include "dgparam/config.hpp"
#include "dgparam/errors.hpp"
#include "dgparam/hbclm.hpp"
#include "dgparam/io.hpp"
#include "dgparam/report.hpp"

namespace fs = std::filesystem;
using namespace dgparam;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

// "name=value" overrides on top of the config values.
void apply_overrides(ParameterSet& params, const std::vector<std::string>& overrides) {
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("--set expects name=value, got '" + item + "'");
        const auto p = param_from_name(item.substr(0, eq));
        if (!p) throw Error("--set: unknown parameter '" + item.substr(0, eq) + "'");
        try {
            params.values[*p] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error("--set: cannot read value for " + item.substr(0, eq));
        }
    }
}

std::vector<LoadTest> load_tests(const FitConfig& cfg, const std::vector<std::string>& data) {
    if (data.size() != cfg.profiles.size()) {
        throw Error("config lists " + std::to_string(cfg.profiles.size()) + " load tests but " +
                    std::to_string(data.size()) + " data files were given");
    }
    std::vector<LoadTest> tests;
    for (std::size_t i = 0; i < data.size(); ++i) {
        MeasurementSeries series;
        try {
            series = parse_measurements(fs::path(data[i]));
        } catch (const ParseError& e) {
            throw Error(data[i] + ": " + e.what());
        }
        require_fit_length(series, data[i]);
        tests.push_back({cfg.profiles[i], std::move(series)});
    }
    return tests;
}

void warn_off_grid(const DataContext& ctx) {
    if (ctx.off_grid_rows() > 0) {
        std::cerr << "warning: " << ctx.off_grid_rows()
                  << " measurement rows are off the simulation sample grid and use the nearest sample\n";
    }
}

// Bound errors carry a free-vector index; translate it to the parameter.
[[noreturn]] void rethrow_named(const OutOfBounds& e, const ParameterSet& params) {
    const auto ids = params.free_params();
    if (e.index() < ids.size()) {
        const Param p = ids[e.index()];
        throw Error(std::string(param_name(p)) + " = " + format_double(params.values[p]) +
                    " violates its bounds " + params.bound(p).describe());
    }
    throw Error(e.what());
}

int cmd_fit(const std::string& config_path, const std::vector<std::string>& data,
            const std::string& report_path, const std::string& trajectory_prefix) {
    FitConfig cfg = parse_config(fs::path(config_path));
    // The GA ignores the start values, but a value outside its own bounds is a config mistake.
    check_initial_values(cfg.params);
    DataContext ctx(cfg.params, load_tests(cfg, data), cfg.sim);
    warn_off_grid(ctx);
    const LeastSquaresProblem problem = ctx.problem();
    const auto specs = cfg.params.free_bounds();
    SolverOptions options;
    options.column_scaling = cfg.column_scaling;

    FitReport report;
    if (cfg.method == Method::Hbclm) {
        report = hbclm_fit(problem, specs, cfg.ga, cfg.stopping, cfg.seed, options);
    } else {
        try {
            report = bclm_solve(problem, cfg.params.free_values(), specs, cfg.stopping, options);
        } catch (const OutOfBounds& e) {
            rethrow_named(e, cfg.params);
        }
    }

    if (order_engine_lags(cfg.params, report.theta_final)) {
        report.detail += std::string(report.detail.empty() ? "" : "; ") + "T2/T3 listed in ascending order";
    }
    if (report_path.empty() || report_path == "-") {
        write_report(std::cout, report, cfg.params, to_string(cfg.method));
    } else {
        std::ofstream out(report_path);
        if (!out) throw Error("cannot write " + report_path);
        write_report(out, report, cfg.params, to_string(cfg.method));
        std::cout << "report written to " << report_path << '\n';
    }

    if (!trajectory_prefix.empty()) {
        const auto fitted = ctx.simulate_all(report.theta_final);
        for (std::size_t i = 0; i < fitted.size(); ++i) {
            const std::string path = trajectory_prefix + "_" + std::to_string(i + 1) + ".csv";
            std::ofstream out(path);
            if (!out) throw Error("cannot write " + path);
            write_fit_trajectory(out, ctx.tests()[i].data, fitted[i]);
        }
    }
    std::cout << (report.converged ? "converged" : "not converged") << ": " << to_string(report.reason)
              << '\n';
    return report.converged ? kExitOk : kExitNotConverged;
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& outputs,
                 const std::vector<std::string>& overrides) {
    FitConfig cfg = parse_config(fs::path(config_path));
    apply_overrides(cfg.params, overrides);
    if (outputs.size() != cfg.profiles.size()) {
        throw Error("config lists " + std::to_string(cfg.profiles.size()) + " load tests but " +
                    std::to_string(outputs.size()) + " --out files were given");
    }
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        try {
            const MeasurementSeries series =
                synthesize(cfg.params.values, cfg.profiles[i], cfg.sim, "dgparam simulate " + config_path);
            write_measurements(fs::path(outputs[i]), series);
        } catch (const SimulationBlewUp& e) {
            throw Error("simulation of load test " + std::to_string(i + 1) + " diverged at t = " +
                        format_double(e.time()) + " s");
        }
    }
    return kExitOk;
}

int cmd_diagnose(const std::string& config_path, const std::vector<std::string>& data,
                 const std::vector<std::string>& overrides) {
    FitConfig cfg = parse_config(fs::path(config_path));
    apply_overrides(cfg.params, overrides);
    DataContext ctx(cfg.params, load_tests(cfg, data), cfg.sim);
    warn_off_grid(ctx);
    const LeastSquaresProblem problem = ctx.problem();
    FitReport report;
    report.theta_final = cfg.params.free_values();
    attach_diagnostics(report, problem, cfg.params.free_bounds(), SolverOptions{});
    if (report.spectrum.size() == 0) throw Error("model cannot be evaluated at the given parameters");
    write_spectrum(std::cout, report.spectrum);
    const auto names = cfg.params.free_names();
    for (std::size_t i : report.low_sensitivity) std::cout << "low sensitivity: " << names[i] << '\n';
    for (std::size_t i : report.weakly_identified) std::cout << "weakly identified: " << names[i] << '\n';
    return kExitOk;
}

int cmd_benchmark(int case_id, bool long_record, bool free_reactances, std::uint64_t seed, double noise) {
    benchmark::Options options;
    options.long_record = long_record;
    options.free_reactances = free_reactances;
    const auto result = benchmark::run_case(case_id, options, seed, noise);
    benchmark::print_case(std::cout, result, options);
    return result.passed() ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diesel generator model simulation and parameter estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> data;
    std::vector<std::string> outputs;
    std::vector<std::string> overrides;
    std::string report_path;
    std::string trajectory_prefix;

    auto* fit = app.add_subcommand("fit", "estimate the free parameters from measured load tests");
    fit->add_option("-c,--config", config_path, "fit configuration")->required()->check(CLI::ExistingFile);
    fit->add_option("-d,--data", data, "measurement file, one per configured load test, in order")
        ->required();
    fit->add_option("-r,--report", report_path, "report file ('-' for stdout)");
    fit->add_option("-t,--trajectory", trajectory_prefix,
                    "write <prefix>_<n>.csv with measured and fitted outputs per test");

    auto* sim = app.add_subcommand("simulate", "simulate the configured load tests");
    sim->add_option("-c,--config", config_path, "configuration")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--out", outputs, "output file, one per configured load test")->required();
    sim->add_option("-s,--set", overrides, "override a parameter value, name=value");

    int case_id = 1;
    bool long_record = false;
    bool free_reactances = false;
    std::uint64_t seed = 1;
    double noise = 0.0;
    auto* bench = app.add_subcommand("benchmark", "run a benchmark case on synthetic data");
    bench->add_option("--case", case_id, "1-3: LM and BCLM from the tabulated start, 4: H-BCLM")
        ->required()
        ->check(CLI::Range(1, 4));
    bench->add_flag("--long-record", long_record, "30 s horizon with a 100 us step (slow)");
    bench->add_flag("--free-reactances", free_reactances, "also estimate X_d, X_q, X_dp");
    bench->add_option("--seed", seed, "GA and noise seed");
    bench->add_option("--noise", noise, "Gaussian noise sigma added to both channels (p.u.)")
        ->check(CLI::NonNegativeNumber);

    auto* diag = app.add_subcommand("diagnose", "eigenvalues of S^T S at the configured values");
    diag->add_option("-c,--config", config_path, "configuration")->required()->check(CLI::ExistingFile);
    diag->add_option("-d,--data", data, "measurement file, one per configured load test")->required();
    diag->add_option("-s,--set", overrides, "override a parameter value, name=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*fit) return cmd_fit(config_path, data, report_path, trajectory_prefix);
        if (*sim) return cmd_simulate(config_path, outputs, overrides);
        if (*bench) return cmd_benchmark(case_id, long_record, free_reactances, seed, noise);
        if (*diag) return cmd_diagnose(config_path, data, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

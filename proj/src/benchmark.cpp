#include "dgparam/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "dgparam/errors.hpp"

namespace dgparam::benchmark {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower/upper bounds in table column order.
constexpr TableRow kLower = {0, 0, 0, 0, 0, 0, 0, 0, 0.05, 0, 0, 0};
constexpr TableRow kUpper = {kInf, 0.5, 0.5, 0.5, 0.5, kInf, kInf, kInf, 0.15, kInf, kInf, kInf};

// Sampling widths for the one-sided columns (unused for two-sided ones).
constexpr TableRow kCaps = {100, 0, 0, 0, 0, 10, 50, 100, 0, 1, 10, 1};

constexpr std::array<TableRow, 3> kInit = {{
    {120, 0.125, 0.045, 0.19, 0.25, 10, 25, 50, 0.14, 0.1, 5, 0.2},
    {80, 0.25, 0.09, 0.4, 0.5, 20, 50, 100, 0.14, 0.2, 2.3, 0.4},
    {400, 0.25, 0.09, 0.4, 0.5, 20, 50, 100, 0.14, 0.2, 5, 0.4},
}};

constexpr std::array<TableRow, 3> kReferenceLm = {{
    {40, 0.025, 0.009, 0.038, 0.05, 2, 5, 10, 0.074, 0.020, 1.16, 0.04},
    {104, -5672, 0.012, -14689, 0.05, 3.5, 2.9, 5.7, 0.088, -0.59, 1.16, 0.04},
    {0.44, 0.002, 20.01, 20.01, 0.76, 13, 17, 80.8, 0, 0, 0.56, 0.45},
}};

constexpr std::array<TableRow, 3> kReferenceBclm = {{
    {40, 0.025, 0.009, 0.038, 0.05, 2, 5, 10, 0.074, 0.020, 1.16, 0.04},
    {40, 0.025, 0.009, 0.038, 0.05, 4.1, 2.4, 4.8, 0.074, 0.020, 1.16, 0.04},
    {300, 0.006, 0.399, 0.490, 0.05, 2.8, 3.6, 7.2, 0.071, 4765, 1.16, 0.04},
}};

std::size_t case_slot(int case_id) {
    if (case_id < 1 || case_id > 3) throw Error("tabulated estimates exist for cases 1-3 only");
    return static_cast<std::size_t>(case_id - 1);
}

}  // namespace

TableRow initial_row(int case_id) { return kInit[case_slot(case_id)]; }
TableRow reference_lm_row(int case_id) { return kReferenceLm[case_slot(case_id)]; }
TableRow reference_bclm_row(int case_id) { return kReferenceBclm[case_slot(case_id)]; }

ParameterSet parameters(const Options& options) {
    ParameterSet set;  // ModelParams defaults are the benchmark values
    for (std::size_t i = 0; i < kTableParams.size(); ++i) {
        set.values[kTableParams[i]] = kTruth[i];
        set.bound(kTableParams[i]) = BoundSpec::from_limits(kLower[i], kUpper[i]);
    }
    if (options.free_reactances) {
        for (Param p : {Param::X_d, Param::X_q, Param::X_dp}) {
            const double v = set.values[p];
            set.bound(p) = BoundSpec::two_sided(v * (1.0 - kReactanceBoundWidth),
                                                v * (1.0 + kReactanceBoundWidth));
        }
    }
    return set;
}

SimConfig sim_config(const Options& options) {
    if (options.long_record) return SimConfig{30.0, 1e-4, 100};
    return SimConfig{5.0, 1e-3, 10};
}

std::vector<LoadStepProfile> profiles(const Options& options) {
    return {LoadStepProfile::from_power(0.3, 0.8, options.t_step),
            LoadStepProfile::from_power(0.8, 0.3, options.t_step)};
}

std::vector<LoadTest> synthetic_tests(const Options& options, double noise_sigma,
                                      std::uint64_t noise_seed) {
    const ParameterSet set = parameters(options);
    const SimConfig cfg = sim_config(options);
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
    std::vector<LoadTest> tests;
    for (const LoadStepProfile& profile : profiles(options)) {
        LoadTest test{profile, synthesize(set.values, profile, cfg, "benchmark truth")};
        if (noise_sigma > 0.0) {
            for (double& f : test.data.freq) f += noise(rng);
            for (double& v : test.data.volt) v += noise(rng);
            test.data.source = "benchmark truth + gaussian noise";
        }
        tests.push_back(std::move(test));
    }
    return tests;
}

Eigen::VectorXd initial_theta(const ParameterSet& params, int case_id) {
    const TableRow row = initial_row(case_id);
    ParameterSet start = params;
    for (std::size_t i = 0; i < kTableParams.size(); ++i) start.values[kTableParams[i]] = row[i];
    return start.free_values();
}

Eigen::VectorXd true_theta(const ParameterSet& params) { return params.free_values(); }

std::vector<double> ga_caps(const ParameterSet& params) {
    std::vector<double> caps;
    for (Param p : params.free_params()) {
        double cap = 10.0;
        for (std::size_t i = 0; i < kTableParams.size(); ++i) {
            if (kTableParams[i] == p) cap = kCaps[i];
        }
        caps.push_back(cap);
    }
    return caps;
}

GaConfig ga_config(const ParameterSet& params) {
    GaConfig cfg;
    cfg.caps = ga_caps(params);
    return cfg;
}

bool CaseResult::passed() const {
    for (const Verdict& v : verdicts) {
        if (!v.pass) return false;
    }
    return true;
}

double max_relative_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth,
                          const std::vector<std::size_t>& skip) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (std::find(skip.begin(), skip.end(), static_cast<std::size_t>(i)) != skip.end()) continue;
        const double err = std::abs(estimate[i] - truth[i]) / std::abs(truth[i]);
        if (!(err <= worst)) worst = err;  // NaN propagates as a failure
    }
    return worst;
}

std::vector<std::size_t> exciter_gain_indices(const ParameterSet& params) {
    std::vector<std::size_t> out;
    const auto ids = params.free_params();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == Param::K_V || ids[i] == Param::K_pe || ids[i] == Param::K_ie) out.push_back(i);
    }
    return out;
}

std::array<double, 2> exciter_products(const ParameterSet& params, const Eigen::VectorXd& theta) {
    const ModelParams p = params.with(theta);
    const bool all_free = params.bound(Param::K_V).is_free() && params.bound(Param::K_pe).is_free() &&
                          params.bound(Param::K_ie).is_free();
    if (!all_free) return {std::nan(""), std::nan("")};
    return {p[Param::K_V] * p[Param::K_pe], p[Param::K_V] * p[Param::K_ie]};
}

namespace {

std::string worst_parameter(const ParameterSet& params, const Eigen::VectorXd& estimate,
                            const Eigen::VectorXd& truth, const std::vector<std::size_t>& skip) {
    const auto names = params.free_names();
    double worst = -1.0;
    std::size_t at = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (std::find(skip.begin(), skip.end(), static_cast<std::size_t>(i)) != skip.end()) continue;
        const double err = std::abs(estimate[i] - truth[i]) / std::abs(truth[i]);
        if (!(err <= worst)) {
            worst = err;
            at = static_cast<std::size_t>(i);
        }
    }
    std::ostringstream os;
    os << "worst " << names[at] << " = " << estimate[static_cast<Eigen::Index>(at)] << " ("
       << std::setprecision(3) << 100.0 * worst << "% off)";
    return os.str();
}

Verdict recovery_verdict(const std::string& label, const ParameterSet& params, const FitReport& r,
                         const Eigen::VectorXd& truth, double tol,
                         const std::vector<std::size_t>& skip = {}) {
    const double err = max_relative_error(r.theta_final, truth, skip);
    return {label, err <= tol, worst_parameter(params, r.theta_final, truth, skip)};
}

bool in_bounds(const ParameterSet& params, const Eigen::VectorXd& theta) {
    const auto specs = params.free_bounds();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!specs[i].contains(theta[static_cast<Eigen::Index>(i)])) return false;
    }
    return true;
}

bool flagged(const FitReport& r, std::size_t i) {
    auto has = [i](const std::vector<std::size_t>& v) { return std::find(v.begin(), v.end(), i) != v.end(); };
    return has(r.low_sensitivity) || has(r.weakly_identified);
}

template <typename Fn>
CaseRun timed(const ParameterSet& set, const std::string& method, Fn fn) {
    const auto t0 = std::chrono::steady_clock::now();
    CaseRun run{method, fn(), 0.0};
    if (order_engine_lags(set, run.report.theta_final)) run.report.detail = "T2/T3 listed in ascending order";
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

}  // namespace

CaseResult run_case(int case_id, const Options& options, std::uint64_t seed, double noise_sigma) {
    if (case_id < 1 || case_id > 4) throw Error("benchmark case must be 1, 2, 3 or 4");
    const ParameterSet set = parameters(options);
    const DataContext ctx(set, synthetic_tests(options, noise_sigma, seed), sim_config(options));
    const LeastSquaresProblem problem = ctx.problem();
    const auto specs = set.free_bounds();
    const Eigen::VectorXd truth = true_theta(set);
    const StoppingCriteria stop;
    const auto exciter = exciter_gain_indices(set);

    CaseResult result;
    result.case_id = case_id;

    if (case_id == 4) {
        result.runs.push_back(timed(set, "H-BCLM", [&] {
            return hbclm_fit(problem, specs, ga_config(set), stop, seed);
        }));
        const FitReport& r = result.runs.back().report;
        if (noise_sigma > 0.0) {
            result.verdicts.push_back({"H-BCLM converges", r.converged, to_string(r.reason)});
            std::ostringstream os;
            os << "rmse f " << r.rmse.f << ", V " << r.rmse.v << " (limit " << 3.0 * noise_sigma << ")";
            result.verdicts.push_back({"H-BCLM rmse within 3x noise", r.rmse.f <= 3.0 * noise_sigma &&
                                                                          r.rmse.v <= 3.0 * noise_sigma,
                                       os.str()});
            return result;
        }
        result.verdicts.push_back(recovery_verdict("H-BCLM recovers every parameter within 2%", set, r,
                                                   truth, kCase4Tolerance));
        result.verdicts.push_back({"H-BCLM converges within 60 total iterations",
                                   r.converged && r.total_iterations() <= kCase4IterationBudget,
                                   std::to_string(r.iterations_ga) + " GA + " +
                                       std::to_string(r.iterations_bclm) + " BCLM"});
        return result;
    }

    const Eigen::VectorXd start = initial_theta(set, case_id);
    result.runs.push_back(timed(set, "LM", [&] { return lm_solve_unconstrained(problem, start, stop); }));
    result.runs.push_back(timed(set, "BCLM", [&] { return bclm_solve(problem, start, specs, stop); }));
    const FitReport& lm = result.runs[0].report;
    const FitReport& bclm = result.runs[1].report;

    if (case_id == 1) {
        result.verdicts.push_back(recovery_verdict("LM recovers every parameter within 1%", set, lm, truth,
                                                   kCase1Tolerance));
        result.verdicts.push_back(recovery_verdict("BCLM recovers every parameter within 1%", set, bclm,
                                                   truth, kCase1Tolerance));
    } else if (case_id == 2) {
        const auto ids = set.free_params();
        bool infeasible = false;
        std::string detail;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] != Param::T1 && ids[i] != Param::T3 && ids[i] != Param::D_f) continue;
            const auto k = static_cast<Eigen::Index>(i);
            const double v = lm.theta_final[k];
            if (v < 0.0 || std::abs(v) > 100.0 * truth[k] || !std::isfinite(v)) {
                infeasible = true;
                detail += std::string(detail.empty() ? "" : ", ") + std::string(param_name(ids[i])) +
                          " = " + std::to_string(v);
            }
        }
        result.verdicts.push_back({"LM ends with an infeasible T1, T3 or D_f", infeasible,
                                   infeasible ? detail : "all three physically plausible"});
        std::ostringstream rm;
        rm << "rmse f " << bclm.rmse.f << ", V " << bclm.rmse.v;
        result.verdicts.push_back({"BCLM in bounds with rmse <= 1e-4 per channel",
                                   in_bounds(set, bclm.theta_final) && bclm.rmse.f <= kCase2Rmse &&
                                       bclm.rmse.v <= kCase2Rmse,
                                   rm.str()});
        result.verdicts.push_back(recovery_verdict("BCLM non-exciter parameters within 5%", set, bclm,
                                                   truth, kCase2Tolerance, exciter));
        bool gains_ok = true;
        std::string off;
        for (std::size_t i : exciter) {
            const auto k = static_cast<Eigen::Index>(i);
            const bool agrees = std::abs(bclm.theta_final[k] - truth[k]) <= kCase2Tolerance * std::abs(truth[k]);
            if (!agrees && !flagged(bclm, i)) gains_ok = false;
            if (!agrees) off += std::string(off.empty() ? "" : ", ") + set.free_names()[i];
        }
        result.verdicts.push_back({"BCLM exciter-gain disagreement is flagged", gains_ok,
                                   off.empty() ? "gains agree with truth" : "differing: " + off});
    } else {
        result.verdicts.push_back({"BCLM stays in bounds", in_bounds(set, bclm.theta_final), ""});
    }
    return result;
}

void print_case(std::ostream& out, const CaseResult& result, const Options& options) {
    const ParameterSet set = parameters(options);
    const auto ids = set.free_params();
    const Eigen::VectorXd truth = true_theta(set);
    const bool tabulated = result.case_id <= 3;

    out << "case " << result.case_id << (options.long_record ? " (long-record grid)" : " (desk-scale grid)")
        << '\n';
    out << std::left << std::setw(8) << "param" << std::right << std::setw(12) << "truth";
    if (tabulated) out << std::setw(12) << "initial";
    for (const CaseRun& run : result.runs) out << std::setw(14) << run.method;
    if (tabulated) out << std::setw(14) << "LM (ref.)" << std::setw(14) << "BCLM (ref.)";
    out << '\n';

    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        std::size_t col = kTableParams.size();
        for (std::size_t c = 0; c < kTableParams.size(); ++c) {
            if (kTableParams[c] == ids[i]) col = c;
        }
        out << std::left << std::setw(8) << param_name(ids[i]) << std::right << std::setprecision(5)
            << std::setw(12) << truth[k];
        if (tabulated) {
            out << std::setw(12);
            if (col < kTableParams.size()) out << initial_row(result.case_id)[col];
            else out << truth[k];
        }
        for (const CaseRun& run : result.runs) out << std::setw(14) << run.report.theta_final[k];
        if (tabulated) {
            if (col < kTableParams.size()) {
                out << std::setw(14) << reference_lm_row(result.case_id)[col] << std::setw(14)
                    << reference_bclm_row(result.case_id)[col];
            } else {
                out << std::setw(14) << "-" << std::setw(14) << "-";
            }
        }
        out << '\n';
    }
    out << std::setprecision(6);
    for (const CaseRun& run : result.runs) {
        const FitReport& r = run.report;
        const auto products = exciter_products(set, r.theta_final);
        out << run.method << ": " << (r.converged ? "converged" : "not converged") << " ("
            << to_string(r.reason) << "), " << r.iterations_ga << " GA + " << r.iterations_bclm
            << " iterations, cost " << r.final_cost << ", rmse f " << r.rmse.f << " V " << r.rmse.v
            << ", K_V*K_pe " << products[0] << ", K_V*K_ie " << products[1] << ", " << std::setprecision(3)
            << run.seconds << " s" << std::setprecision(6) << '\n';
    }
    for (const Verdict& v : result.verdicts) {
        out << (v.pass ? "PASS  " : "FAIL  ") << v.label;
        if (!v.detail.empty()) out << "  [" << v.detail << "]";
        out << '\n';
    }
}

}  // namespace dgparam::benchmark

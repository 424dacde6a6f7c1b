#pragma once

// The 50 kVA benchmark generator: true parameters, bounds, the tabulated
// initial estimates of Cases 1-3 and the reference final estimates.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgparam/estimation.hpp"
#include "dgparam/golga.hpp"
#include "dgparam/hbclm.hpp"

namespace dgparam::benchmark {

/// Estimated parameters in table column order.
inline constexpr std::array<Param, 12> kTableParams = {
    Param::m,   Param::T1,  Param::T2,   Param::T3,  Param::T_V,   Param::K_V,
    Param::K_pe, Param::K_ie, Param::H, Param::D_f, Param::T_dop, Param::R_s,
};

using TableRow = std::array<double, 12>;

inline constexpr TableRow kTruth = {40, 0.025, 0.009, 0.038, 0.05, 2, 5, 10, 0.074, 0.020, 1.16, 0.04};

/// Initial estimates of Cases 1-3.
TableRow initial_row(int case_id);

/// Reference LM and BCLM end points for Cases 1-3, shown next to ours.
TableRow reference_lm_row(int case_id);
TableRow reference_bclm_row(int case_id);

/// Relative half-width of the machine reactance bounds around the datasheet values.
inline constexpr double kReactanceBoundWidth = 0.2;

struct Options {
    bool long_record = false;
    /// Treat X_d, X_q, X_dp as free with +-20% two-sided bounds.
    bool free_reactances = false;
    double t_step = 1.0;
};

/// True parameter values with the benchmark bounds on the free set.
ParameterSet parameters(const Options& options = {});

SimConfig sim_config(const Options& options = {});

/// 30% -> 80% and 80% -> 30% of rated power.
std::vector<LoadStepProfile> profiles(const Options& options = {});

/// Noise-free synthetic measurements from the true parameters.
std::vector<LoadTest> synthetic_tests(const Options& options = {}, double noise_sigma = 0.0,
                                      std::uint64_t noise_seed = 1);

/// Free-parameter vector for a case (table row, reactances at datasheet values).
Eigen::VectorXd initial_theta(const ParameterSet& params, int case_id);
Eigen::VectorXd true_theta(const ParameterSet& params);

/// GA sampling caps for one-sided bounds, per free parameter.
std::vector<double> ga_caps(const ParameterSet& params);

GaConfig ga_config(const ParameterSet& params);

/// Relative recovery tolerances and the response threshold of the case checks.
inline constexpr double kCase1Tolerance = 0.01;
inline constexpr double kCase2Tolerance = 0.05;
inline constexpr double kCase2Rmse = 1e-4;
inline constexpr double kCase4Tolerance = 0.02;
inline constexpr std::size_t kCase4IterationBudget = 60;

struct CaseRun {
    std::string method;  // "LM", "BCLM" or "H-BCLM"
    FitReport report;
    double seconds = 0.0;
};

struct Verdict {
    std::string label;
    bool pass = false;
    std::string detail;
};

struct CaseResult {
    int case_id = 1;
    std::vector<CaseRun> runs;
    std::vector<Verdict> verdicts;

    bool passed() const;
};

/// Cases 1-3 run LM and BCLM from the tabulated start; case 4 runs H-BCLM
/// with the given GA seed. noise_sigma adds Gaussian noise to the data.
CaseResult run_case(int case_id, const Options& options = {}, std::uint64_t seed = 1,
                    double noise_sigma = 0.0);

/// Largest relative error over the free parameters, optionally skipping some.
double max_relative_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth,
                          const std::vector<std::size_t>& skip = {});

/// Indices of K_V, K_pe, K_ie in the free vector of params.
std::vector<std::size_t> exciter_gain_indices(const ParameterSet& params);

/// K_V*K_pe and K_V*K_ie of a free vector (NaN if a gain is fixed).
std::array<double, 2> exciter_products(const ParameterSet& params, const Eigen::VectorXd& theta);

/// Table-style comparison plus one PASS/FAIL line per verdict.
void print_case(std::ostream& out, const CaseResult& result, const Options& options = {});

}  // namespace dgparam::benchmark

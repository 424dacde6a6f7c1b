#pragma once

// Two-stage estimator: GOL-GA global search followed by box-constrained
// Levenberg-Marquardt iterations in the unbounded search space. The plain
// LM loop on theta is kept for comparison.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgparam/boxmap.hpp"
#include "dgparam/golga.hpp"
#include "dgparam/nlsq.hpp"

namespace dgparam {

struct StoppingCriteria {
    int max_iterations = 50;
    double rel_cost_tol = 1e-6;

    void validate() const;
};

/// A stalled run whose cost fell below this fraction of the starting cost
/// counts as converged (exact fit, nothing left to reduce).
inline constexpr double kExactFitRatio = 1e-20;

struct SolverOptions {
    DampingState damping{};
    double fd_rel_step = 1e-6;
    int max_inflations = 10;
    bool parallel = true;
    /// BCLM solves the damped system on unit-norm sensitivity columns.
    bool column_scaling = true;
    /// Diagnostics thresholds at the solution.
    double low_sensitivity_ratio = 1e-6;
    double null_space_ratio = 1e-9;
    double null_space_share = 0.1;
};

enum class StopReason {
    RelativeCost,
    MaxIterations,
    Stalled,
    InfeasibleStart,
};

std::string to_string(StopReason reason);

struct FitReport {
    Eigen::VectorXd theta_final;
    double final_cost = 0.0;
    std::vector<double> cost_trace;       // initial cost, then one entry per accepted iteration
    std::vector<double> lambda_trace;     // damping adopted at each accepted iteration
    std::vector<Eigen::VectorXd> theta_trace;
    ChannelRmse rmse;
    std::size_t iterations_ga = 0;
    std::size_t iterations_bclm = 0;
    std::vector<double> ga_cost_trace;
    bool converged = false;
    StopReason reason = StopReason::MaxIterations;
    std::string detail;
    /// Eigenvalues of S^T S (theta space) at the solution, descending.
    Eigen::VectorXd spectrum;
    std::vector<std::size_t> fd_failed_columns;
    std::vector<std::size_t> at_bound;
    /// Column norm below low_sensitivity_ratio of the largest.
    std::vector<std::size_t> low_sensitivity;
    /// Significant weight in a near-null direction of the scaled normal matrix.
    std::vector<std::size_t> weakly_identified;

    std::size_t total_iterations() const { return iterations_ga + iterations_bclm; }
};

/// Box-constrained LM. theta0 must satisfy the bounds (OutOfBounds otherwise);
/// every parameter vector handed to the model lies inside them.
FitReport bclm_solve(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta0,
                     std::span<const BoundSpec> specs, const StoppingCriteria& stop,
                     const SolverOptions& options = {});

/// Plain LM on theta with no bound handling and unscaled lambda*I damping.
FitReport lm_solve_unconstrained(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta0,
                                 const StoppingCriteria& stop, const SolverOptions& options = {});

/// GOL-GA search, then BCLM from the best chromosome.
FitReport hbclm_fit(const LeastSquaresProblem& problem, std::span<const BoundSpec> specs,
                    const GaConfig& ga, const StoppingCriteria& stop, std::uint64_t seed,
                    const SolverOptions& options = {});

/// Recomputes spectrum and identifiability flags of a report at its final theta.
void attach_diagnostics(FitReport& report, const LeastSquaresProblem& problem,
                        std::span<const BoundSpec> specs, const SolverOptions& options);

}  // namespace dgparam

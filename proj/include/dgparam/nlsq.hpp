#pragma once

// Nonlinear least squares machinery shared by the LM, BCLM and GN paths:
// residual/cost evaluation, forward-difference output sensitivities, the
// Gauss-Newton and Levenberg-Marquardt normal-equation steps, damping
// selection and the rank diagnostics.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dgparam/boxmap.hpp"

namespace dgparam {

/// Stacked model outputs for a parameter vector, or nullopt when the model
/// cannot be evaluated there (invalid parameters, simulation blow-up).
using ResponseFn = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct LeastSquaresProblem {
    ResponseFn response;
    Eigen::VectorXd measured;
    /// Outputs are interleaved per sample: row k*channels + c is channel c.
    int channels = 2;
};

struct ResidualSet {
    Eigen::VectorXd residuals;  // measured - simulated
    Eigen::VectorXd simulated;
    double cost = 0.0;          // 0.5 * sum of squares, +inf when unevaluable
    int channels = 2;

    bool finite() const;
};

/// h(theta) = 0.5 * ||z - y(theta)||^2. Never throws for model failures;
/// those come back as an infinite cost.
ResidualSet objective(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta);

/// Builds a residual set from an already simulated response.
ResidualSet make_residuals(const Eigen::VectorXd& measured, const Eigen::VectorXd& simulated,
                           int channels);

struct FdOptions {
    double rel_step = 1e-6;
    double abs_floor = 1.0;
    /// When given, a perturbation that would cross a bound is taken backwards.
    std::span<const BoundSpec> bounds{};
    bool parallel = true;
};

struct SensitivityMatrix {
    Eigen::MatrixXd entries;                 // rows = samples * channels, cols = free params
    std::vector<std::size_t> failed_columns; // zeroed after the retry also failed
    std::vector<std::size_t> retried_columns;
};

/// Perturbation used for column j: rel_step * max(|theta_j|, abs_floor).
double fd_step(double theta_j, const FdOptions& options);

/// Forward-difference sensitivities dy/dtheta, one extra response per column.
/// baseline is the response at theta.
SensitivityMatrix fd_sensitivity(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& baseline, const FdOptions& options = {});

inline constexpr double kSingularCondition = 1e14;

/// Gauss-Newton update solving (S^T S) d = S^T r. Throws SingularNormalMatrix
/// when the condition number of S^T S exceeds kSingularCondition.
Eigen::VectorXd gn_step(const Eigen::MatrixXd& s, const Eigen::VectorXd& r);

/// Levenberg-Marquardt update solving (S^T S + lambda I) d = S^T r.
Eigen::VectorXd lm_step(const Eigen::MatrixXd& s, const Eigen::VectorXd& r, double lambda);

/// Same solve from a precomputed normal matrix and gradient S^T r.
Eigen::VectorXd lm_step_normal(const Eigen::MatrixXd& normal, const Eigen::VectorXd& gradient,
                               double lambda);

struct DampingState {
    double lambda = 1e-3;
    double a = 0.1;  // candidate ratio, 0 < a < 1
};

struct LambdaCandidate {
    Eigen::VectorXd step;
    double cost = 0.0;
};

struct LambdaChoice {
    DampingState state;
    LambdaCandidate accepted;
    int inflations = 0;
};

/// Evaluates the step for a given damping value and returns its cost.
using StepEvaluator = std::function<LambdaCandidate(double lambda)>;

/// Compares the costs of the steps at a*lambda, lambda and lambda/a and
/// adopts the cheapest one if it does not increase the current cost.
/// Otherwise lambda is inflated by 1/a and the comparison repeated, up to
/// max_inflations times, after which StalledIteration is thrown.
LambdaChoice choose_lambda(const DampingState& state, double current_cost,
                           const StepEvaluator& evaluate, int max_inflations = 10,
                           bool parallel = true);

/// Eigenvalues of S^T S in descending order.
Eigen::VectorXd hessian_spectrum(const Eigen::MatrixXd& s);

struct ChannelRmse {
    double f = 0.0;
    double v = 0.0;
};

/// Root-mean-square residual of channel 0 (frequency) and channel 1 (voltage).
ChannelRmse channel_rmse(const ResidualSet& r);

}  // namespace dgparam

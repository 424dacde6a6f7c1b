#include "dgparam/hbclm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

#include "dgparam/errors.hpp"

namespace dgparam {

namespace {

// Search-space view used by the shared LM loop: identity for plain LM,
// the box transformation for BCLM.
struct SearchSpace {
    std::span<const BoundSpec> specs;  // empty for the identity map

    bool bounded() const { return !specs.empty(); }
    Eigen::VectorXd to_theta(const Eigen::VectorXd& x) const {
        return bounded() ? forward(x, specs) : x;
    }
    Eigen::VectorXd from_theta(const Eigen::VectorXd& theta) const {
        return bounded() ? inverse(theta, specs) : theta;
    }
    Eigen::MatrixXd chain(const Eigen::MatrixXd& s_theta, const Eigen::VectorXd& x) const {
        return bounded() ? beta_sensitivity(s_theta, mapping_jacobian(x, specs)) : s_theta;
    }
    void nudge(Eigen::VectorXd& x) const {
        if (bounded()) nudge_stationary(x, specs);
    }
};

FdOptions fd_options(const SolverOptions& options, std::span<const BoundSpec> specs) {
    FdOptions fd;
    fd.rel_step = options.fd_rel_step;
    fd.bounds = specs;
    fd.parallel = options.parallel;
    return fd;
}

FitReport run_lm(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta0,
                 const SearchSpace& space, const StoppingCriteria& stop,
                 const SolverOptions& options, bool column_scaling) {
    stop.validate();
    FitReport report;
    Eigen::VectorXd x = space.from_theta(theta0);
    space.nudge(x);
    Eigen::VectorXd theta = space.to_theta(x);
    ResidualSet current = objective(problem, theta);
    report.theta_final = theta;
    report.final_cost = current.cost;
    report.cost_trace.push_back(current.cost);
    report.theta_trace.push_back(theta);

    if (!current.finite()) {
        report.reason = StopReason::InfeasibleStart;
        report.detail = "model could not be evaluated at the starting point";
        return report;
    }

    std::set<std::size_t> failed;
    DampingState damping = options.damping;
    const FdOptions fd = fd_options(options, space.specs);

    for (int iter = 1; iter <= stop.max_iterations; ++iter) {
        SensitivityMatrix s_theta = fd_sensitivity(problem, theta, current.simulated, fd);
        failed.insert(s_theta.failed_columns.begin(), s_theta.failed_columns.end());
        Eigen::MatrixXd s = space.chain(s_theta.entries, x);
        Eigen::VectorXd scale = Eigen::VectorXd::Ones(s.cols());
        if (column_scaling) {
            // Unit column norms; the step is mapped back through the same scale.
            const Eigen::VectorXd norms = s.colwise().norm();
            const double top = norms.size() ? norms.maxCoeff() : 0.0;
            for (Eigen::Index j = 0; j < norms.size(); ++j) {
                if (norms[j] > 1e-12 * top) scale[j] = norms[j];
            }
            s = s * scale.cwiseInverse().asDiagonal();
        }
        const Eigen::MatrixXd normal = s.transpose() * s;
        const Eigen::VectorXd gradient = s.transpose() * current.residuals;

        LambdaChoice choice;
        try {
            choice = choose_lambda(
                damping, current.cost,
                [&](double lambda) {
                    LambdaCandidate c;
                    c.step = lm_step_normal(normal, gradient, lambda).cwiseQuotient(scale);
                    c.cost = objective(problem, space.to_theta(x + c.step)).cost;
                    return c;
                },
                options.max_inflations, options.parallel);
        } catch (const StalledIteration& e) {
            report.reason = StopReason::Stalled;
            report.detail = e.what();
            // Nothing left to reduce: the residual is at rounding level.
            if (current.cost <= kExactFitRatio * report.cost_trace.front()) report.converged = true;
            break;
        }

        const double previous = current.cost;
        damping = choice.state;
        x += choice.accepted.step;
        space.nudge(x);
        theta = space.to_theta(x);
        current = objective(problem, theta);
        if (!current.finite()) {
            // The nudge moved onto an unevaluable point; undo it.
            x -= choice.accepted.step;
            theta = space.to_theta(x);
            current = objective(problem, theta);
            report.reason = StopReason::Stalled;
            report.detail = "accepted step could not be re-evaluated";
            break;
        }

        report.iterations_bclm = static_cast<std::size_t>(iter);
        report.cost_trace.push_back(current.cost);
        report.lambda_trace.push_back(damping.lambda);
        report.theta_trace.push_back(theta);
        report.theta_final = theta;
        report.final_cost = current.cost;

        const double rel = std::abs(current.cost - previous) / std::max(current.cost, 1e-30);
        if (rel <= stop.rel_cost_tol) {
            report.converged = true;
            report.reason = StopReason::RelativeCost;
            break;
        }
        if (iter == stop.max_iterations) report.reason = StopReason::MaxIterations;
    }

    report.theta_final = theta;
    report.final_cost = current.cost;
    report.rmse = channel_rmse(current);
    report.fd_failed_columns.assign(failed.begin(), failed.end());
    return report;
}

}  // namespace

void StoppingCriteria::validate() const {
    if (max_iterations < 1) throw Error("max_iterations must be at least 1");
    if (!(rel_cost_tol > 0.0)) throw Error("rel_cost_tol must be positive");
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::RelativeCost: return "relative cost change below tolerance";
        case StopReason::MaxIterations: return "maximum iterations reached";
        case StopReason::Stalled: return "stalled: no damping value reduced the cost";
        case StopReason::InfeasibleStart: return "model not evaluable at the starting point";
    }
    return "unknown";
}

void attach_diagnostics(FitReport& report, const LeastSquaresProblem& problem,
                        std::span<const BoundSpec> specs, const SolverOptions& options) {
    const Eigen::VectorXd& theta = report.theta_final;
    const auto n = theta.size();
    report.at_bound.clear();
    report.low_sensitivity.clear();
    report.weakly_identified.clear();
    for (Eigen::Index i = 0; i < n && !specs.empty(); ++i) {
        const BoundSpec& s = specs[static_cast<std::size_t>(i)];
        const double lo = s.lower_limit();
        const double hi = s.upper_limit();
        const double tol_lo = 1e-9 * std::max(1.0, std::abs(lo));
        const double tol_hi = 1e-9 * std::max(1.0, std::abs(hi));
        if ((std::isfinite(lo) && theta[i] - lo <= tol_lo) ||
            (std::isfinite(hi) && hi - theta[i] <= tol_hi)) {
            report.at_bound.push_back(static_cast<std::size_t>(i));
        }
    }

    const ResidualSet r = objective(problem, theta);
    if (!r.finite()) return;
    FdOptions fd = fd_options(options, specs);
    const SensitivityMatrix s = fd_sensitivity(problem, theta, r.simulated, fd);
    report.spectrum = hessian_spectrum(s.entries);

    const Eigen::VectorXd norms = s.entries.colwise().norm();
    const double max_norm = norms.size() ? norms.maxCoeff() : 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (norms[j] < options.low_sensitivity_ratio * max_norm) {
            report.low_sensitivity.push_back(static_cast<std::size_t>(j));
        }
    }

    // Relative sensitivities make the null directions scale free.
    const Eigen::VectorXd scale = theta.cwiseAbs().cwiseMax(1e-12);
    const Eigen::MatrixXd scaled = s.entries * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled.transpose() * scaled);
    const Eigen::VectorXd values = eig.eigenvalues();
    const double top = values.size() ? values.maxCoeff() : 0.0;
    std::set<std::size_t> weak;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (values[k] > options.null_space_ratio * top) continue;
        const Eigen::VectorXd v = eig.eigenvectors().col(k);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(v[j]) >= options.null_space_share) weak.insert(static_cast<std::size_t>(j));
        }
    }
    report.weakly_identified.assign(weak.begin(), weak.end());
}

FitReport bclm_solve(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta0,
                     std::span<const BoundSpec> specs, const StoppingCriteria& stop,
                     const SolverOptions& options) {
    validate_bounds(specs);
    if (static_cast<std::size_t>(theta0.size()) != specs.size()) {
        throw Error("initial estimate length does not match the number of bounds");
    }
    FitReport report = run_lm(problem, theta0, SearchSpace{specs}, stop, options,
                               options.column_scaling);
    attach_diagnostics(report, problem, specs, options);
    return report;
}

FitReport lm_solve_unconstrained(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta0,
                                 const StoppingCriteria& stop, const SolverOptions& options) {
    FitReport report = run_lm(problem, theta0, SearchSpace{}, stop, options, false);
    attach_diagnostics(report, problem, {}, options);
    return report;
}

FitReport hbclm_fit(const LeastSquaresProblem& problem, std::span<const BoundSpec> specs,
                    const GaConfig& ga, const StoppingCriteria& stop, std::uint64_t seed,
                    const SolverOptions& options) {
    validate_bounds(specs);
    const GaResult global = run_ga(
        [&](const Eigen::VectorXd& theta) { return objective(problem, theta).cost; }, specs, ga,
        seed, options.parallel);
    FitReport report = bclm_solve(problem, global.best.theta, specs, stop, options);
    report.iterations_ga = global.generations;
    report.ga_cost_trace = global.best_cost_trace;
    return report;
}

}  // namespace dgparam

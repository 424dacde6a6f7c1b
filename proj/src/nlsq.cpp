#include "dgparam/nlsq.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "dgparam/errors.hpp"
#include "dgparam/parallel.hpp"

namespace dgparam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<Eigen::VectorXd> safe_response(const LeastSquaresProblem& problem,
                                             const Eigen::VectorXd& theta) {
    if (!theta.allFinite()) return std::nullopt;
    try {
        auto y = problem.response(theta);
        if (!y || y->size() != problem.measured.size() || !y->allFinite()) return std::nullopt;
        return y;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

bool ResidualSet::finite() const { return std::isfinite(cost); }

ResidualSet make_residuals(const Eigen::VectorXd& measured, const Eigen::VectorXd& simulated,
                           int channels) {
    ResidualSet out;
    out.channels = channels;
    out.simulated = simulated;
    out.residuals = measured - simulated;
    out.cost = 0.5 * out.residuals.squaredNorm();
    return out;
}

ResidualSet objective(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta) {
    auto y = safe_response(problem, theta);
    if (!y) {
        ResidualSet out;
        out.channels = problem.channels;
        out.cost = kInf;
        return out;
    }
    return make_residuals(problem.measured, *y, problem.channels);
}

double fd_step(double theta_j, const FdOptions& options) {
    return options.rel_step * std::max(std::abs(theta_j), options.abs_floor);
}

SensitivityMatrix fd_sensitivity(const LeastSquaresProblem& problem, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& baseline, const FdOptions& options) {
    const Eigen::Index n = theta.size();
    SensitivityMatrix out;
    out.entries = Eigen::MatrixXd::Zero(baseline.size(), n);
    std::vector<int> status(static_cast<std::size_t>(n), 0);  // 0 ok, 1 retried, 2 failed

    auto column = [&](std::size_t jj) {
        const auto j = static_cast<Eigen::Index>(jj);
        double delta = fd_step(theta[j], options);
        for (int attempt = 0; attempt < 2; ++attempt) {
            Eigen::VectorXd perturbed = theta;
            double signed_delta = delta;
            if (!options.bounds.empty() && !options.bounds[jj].contains(theta[j] + delta)) {
                signed_delta = -delta;
            }
            perturbed[j] += signed_delta;
            if (auto y = safe_response(problem, perturbed)) {
                out.entries.col(j) = (*y - baseline) / signed_delta;
                status[jj] = attempt;
                return;
            }
            delta /= 10.0;
        }
        status[jj] = 2;
    };

    if (options.parallel) {
        parallel_for(static_cast<std::size_t>(n), column);
    } else {
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) column(j);
    }

    for (std::size_t j = 0; j < status.size(); ++j) {
        if (status[j] >= 1) out.retried_columns.push_back(j);
        if (status[j] == 2) out.failed_columns.push_back(j);
    }
    return out;
}

Eigen::VectorXd gn_step(const Eigen::MatrixXd& s, const Eigen::VectorXd& r) {
    const Eigen::MatrixXd normal = s.transpose() * s;
    const Eigen::VectorXd gradient = s.transpose() * r;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    const double condition = lmin > 0.0 ? lmax / lmin : kInf;
    if (!(lmax > 0.0) || !(condition <= kSingularCondition)) {
        std::ostringstream os;
        os << "normal matrix is numerically singular (condition " << condition << ")";
        throw SingularNormalMatrix(condition, os.str());
    }
    return normal.ldlt().solve(gradient);
}

Eigen::VectorXd lm_step_normal(const Eigen::MatrixXd& normal, const Eigen::VectorXd& gradient,
                               double lambda) {
    if (!(lambda > 0.0)) throw Error("LM damping must be positive");
    Eigen::MatrixXd damped = normal;
    damped.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(damped);
    if (llt.info() == Eigen::Success) return llt.solve(gradient);
    // Only reachable when lambda is lost to rounding against huge entries.
    return damped.ldlt().solve(gradient);
}

Eigen::VectorXd lm_step(const Eigen::MatrixXd& s, const Eigen::VectorXd& r, double lambda) {
    return lm_step_normal(s.transpose() * s, s.transpose() * r, lambda);
}

LambdaChoice choose_lambda(const DampingState& state, double current_cost,
                           const StepEvaluator& evaluate, int max_inflations, bool parallel) {
    if (!(state.lambda > 0.0) || !(state.a > 0.0 && state.a < 1.0)) {
        throw Error("invalid damping state");
    }
    DampingState trial = state;
    for (int inflation = 0; inflation <= max_inflations; ++inflation) {
        // Ordered from least to most damped so ties favour the larger step.
        const std::array<double, 3> lambdas = {trial.a * trial.lambda, trial.lambda,
                                               trial.lambda / trial.a};
        std::array<LambdaCandidate, 3> candidates;
        auto run = [&](std::size_t i) { candidates[i] = evaluate(lambdas[i]); };
        if (parallel) {
            parallel_for(3, run);
        } else {
            for (std::size_t i = 0; i < 3; ++i) run(i);
        }

        std::size_t best = 0;
        for (std::size_t i = 1; i < 3; ++i) {
            if (candidates[i].cost < candidates[best].cost) best = i;
        }
        if (candidates[best].cost <= current_cost) {
            LambdaChoice choice;
            choice.state = DampingState{lambdas[best], trial.a};
            choice.accepted = std::move(candidates[best]);
            choice.inflations = inflation;
            return choice;
        }
        trial.lambda /= trial.a;
    }
    throw StalledIteration("no damping value reduced the cost after " +
                           std::to_string(max_inflations) + " inflations");
}

Eigen::VectorXd hessian_spectrum(const Eigen::MatrixXd& s) {
    const Eigen::MatrixXd normal = s.transpose() * s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
    Eigen::VectorXd values = eig.eigenvalues();  // ascending
    return values.reverse();
}

ChannelRmse channel_rmse(const ResidualSet& r) {
    std::array<double, 2> sum{0.0, 0.0};
    std::array<std::size_t, 2> count{0, 0};
    const int channels = std::max(r.channels, 1);
    for (Eigen::Index i = 0; i < r.residuals.size(); ++i) {
        const auto c = static_cast<std::size_t>(i % channels);
        if (c > 1) continue;
        sum[c] += r.residuals[i] * r.residuals[i];
        ++count[c];
    }
    ChannelRmse out;
    out.f = count[0] ? std::sqrt(sum[0] / static_cast<double>(count[0])) : 0.0;
    out.v = count[1] ? std::sqrt(sum[1] / static_cast<double>(count[1])) : 0.0;
    return out;
}

}  // namespace dgparam

#include "dgparam/integrator.hpp"

#include <cmath>
#include <string>

#include "dgparam/errors.hpp"

namespace dgparam {

namespace {

constexpr double kBlowUpLimit = 1e6;

}  // namespace

LoadStepProfile LoadStepProfile::from_power(double p_pre, double p_post, double t_step) {
    if (!(p_pre > 0.0) || !(p_post > 0.0)) throw Error("load power fractions must be positive");
    return {resistance_from_power(p_pre), resistance_from_power(p_post), t_step};
}

void LoadStepProfile::validate() const {
    if (!(r_pre > 0.0) || !(r_post > 0.0)) throw Error("load resistances must be positive");
    if (!(t_step >= 0.0)) throw Error("load step time must be non-negative");
}

void SimConfig::validate() const {
    if (!(h > 0.0)) throw Error("integration step must be positive");
    if (!(t_end > 0.0)) throw Error("simulation duration must be positive");
    if (sample_stride < 1) throw Error("sample stride must be at least 1");
}

std::size_t SimConfig::step_count() const {
    return static_cast<std::size_t>(std::llround(t_end / h));
}

StateVector rk4_step(const StateVector& x, double t, double h, double r_load,
                     const ModelParams& p) {
    return rk4_step<StateVector>(
        [&](double, const StateVector& s) { return state_derivative(s, r_load, p); }, x, t, h);
}

Trajectory simulate(const ModelParams& p, const LoadStepProfile& profile, const SimConfig& cfg,
                    const std::optional<StateVector>& x0) {
    profile.validate();
    cfg.validate();
    const std::size_t steps = cfg.step_count();
    // First grid index at or after the step instant.
    const auto step_index =
        static_cast<std::size_t>(std::ceil(profile.t_step / cfg.h - 1e-9));

    StateVector x = x0 ? *x0 : steady_state(profile.r_pre, p);

    Trajectory traj;
    traj.times.reserve(steps / cfg.sample_stride + 1);
    traj.outputs.reserve(steps / cfg.sample_stride + 1);

    auto check = [&](double t) {
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > kBlowUpLimit) {
            throw SimulationBlewUp(t, "simulation blew up at t = " + std::to_string(t) + " s");
        }
    };

    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * cfg.h;
        const double r = i >= step_index ? profile.r_post : profile.r_pre;
        if (i % cfg.sample_stride == 0) {
            traj.times.push_back(t);
            traj.outputs.push_back(output_map(x, r, p));
        }
        if (i == steps) break;
        try {
            x = rk4_step(x, t, cfg.h, r, p);
        } catch (const NonFiniteState&) {
            throw SimulationBlewUp(t, "state derivative became non-finite at t = " +
                                          std::to_string(t) + " s");
        }
        check(t + cfg.h);
    }
    traj.final_state = x;
    return traj;
}

}  // namespace dgparam

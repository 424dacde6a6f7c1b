#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dgparam/model.hpp"

namespace dgparam {

/// Resistive load stepping from r_pre to r_post at t_step.
struct LoadStepProfile {
    double r_pre = 1.0 / 0.3;
    double r_post = 1.0 / 0.8;
    double t_step = 1.0;

    /// Step between two fractions of rated power.
    static LoadStepProfile from_power(double p_pre, double p_post, double t_step);
    void validate() const;
};

struct SimConfig {
    double t_end = 5.0;
    double h = 1e-3;
    std::size_t sample_stride = 10;

    void validate() const;
    std::size_t step_count() const;
    double sample_period() const { return h * static_cast<double>(sample_stride); }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<OutputVector> outputs;
    StateVector final_state;
};

/// One classical fourth-order Runge-Kutta step for any autonomous-in-input
/// system dx/dt = f(t, x).
template <typename State, typename Rhs>
State rk4_step(const Rhs& f, const State& x, double t, double h) {
    const State k1 = f(t, x);
    const State k2 = f(t + 0.5 * h, State(x + (0.5 * h) * k1));
    const State k3 = f(t + 0.5 * h, State(x + (0.5 * h) * k2));
    const State k4 = f(t + h, State(x + h * k3));
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// RK4 step of the generator model with the load held at r_load.
StateVector rk4_step(const StateVector& x, double t, double h, double r_load, const ModelParams& p);

/// Integrates the model over [0, t_end] on a fixed grid, starting from the
/// steady state at r_pre unless x0 is given. Throws SimulationBlewUp when a
/// state leaves the finite range (|x| > 1e6).
Trajectory simulate(const ModelParams& p, const LoadStepProfile& profile, const SimConfig& cfg,
                    const std::optional<StateVector>& x0 = std::nullopt);

}  // namespace dgparam

#include "dgparam/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "dgparam/errors.hpp"

namespace dgparam {

namespace {

constexpr std::array<std::string_view, kParamCount> kNames = {
    "m", "T1", "T2", "T3", "P_ref", "omega_ref",
    "T_V", "K_V", "K_pe", "K_ie", "V_tref", "vf_max",
    "H", "omega_s", "D_f", "X_d", "X_q", "X_dp", "T_dop", "R_s",
};

using Reduced = Eigen::Matrix<double, 6, 1>;

// Derivative without the rotor angle row; delta is never read by the model.
Reduced reduced_residual(const Reduced& y, double r_load, const ModelParams& p) {
    StateVector x;
    x.head<6>() = y;
    x[kDelta] = 0.0;
    return state_derivative(x, r_load, p).head<6>();
}

}  // namespace

std::string_view param_name(Param p) { return kNames[static_cast<std::size_t>(p)]; }

std::optional<Param> param_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (kNames[i] == name) return static_cast<Param>(i);
    }
    return std::nullopt;
}

std::array<Param, kParamCount> all_params() {
    std::array<Param, kParamCount> out{};
    for (std::size_t i = 0; i < kParamCount; ++i) out[i] = static_cast<Param>(i);
    return out;
}

double& ModelParams::operator[](Param p) {
    switch (p) {
        case Param::m: return engine.m;
        case Param::T1: return engine.T1;
        case Param::T2: return engine.T2;
        case Param::T3: return engine.T3;
        case Param::P_ref: return engine.P_ref;
        case Param::omega_ref: return engine.omega_ref;
        case Param::T_V: return exciter.T_V;
        case Param::K_V: return exciter.K_V;
        case Param::K_pe: return exciter.K_pe;
        case Param::K_ie: return exciter.K_ie;
        case Param::V_tref: return exciter.V_tref;
        case Param::vf_max: return exciter.vf_max;
        case Param::H: return gen.H;
        case Param::omega_s: return gen.omega_s;
        case Param::D_f: return gen.D_f;
        case Param::X_d: return gen.X_d;
        case Param::X_q: return gen.X_q;
        case Param::X_dp: return gen.X_dp;
        case Param::T_dop: return gen.T_dop;
        case Param::R_s: return gen.R_s;
    }
    throw Error("unknown parameter id");
}

double ModelParams::operator[](Param p) const {
    return const_cast<ModelParams&>(*this)[p];
}

bool physically_valid(const ModelParams& p) {
    for (Param id : all_params()) {
        if (!std::isfinite(p[id])) return false;
    }
    return p.engine.T2 > 0.0 && p.engine.T3 > 0.0 && p.exciter.T_V > 0.0 &&
           p.gen.H > 0.0 && p.gen.T_dop > 0.0;
}

double resistance_from_power(double power_fraction) { return 1.0 / power_fraction; }

AlgebraicOutputs solve_network(double Eqp, double r_load, const GenParams& gen) {
    if (!std::isfinite(Eqp) || !std::isfinite(r_load) || !std::isfinite(gen.R_s) ||
        !std::isfinite(gen.X_q) || !std::isfinite(gen.X_dp)) {
        throw NonFiniteInput("solve_network: non-finite argument");
    }
    // [0; E'q] = [[R, -Xq], [X'd, R]] [Id; Iq] with R = Rs + Rload.
    const double r = gen.R_s + r_load;
    const double det = r * r + gen.X_q * gen.X_dp;
    AlgebraicOutputs out;
    out.Id = gen.X_q * Eqp / det;
    out.Iq = r * Eqp / det;
    out.Vd = r_load * out.Id;
    out.Vq = r_load * out.Iq;
    out.Vt = std::sqrt(out.Vd * out.Vd + out.Vq * out.Vq);
    return out;
}

AlgebraicOutputs algebraic_outputs(const StateVector& x, double r_load, const ModelParams& p) {
    const auto& e = p.engine;
    const auto& ex = p.exciter;
    AlgebraicOutputs alg = solve_network(x[kEqp], r_load, p.gen);
    const double t23 = e.T2 * e.T3;
    alg.Pm = (x[kQ1] + e.T1 * x[kQ2]) / t23;
    const double vf = ex.K_V / ex.T_V * (ex.K_ie * x[kXi1] + ex.K_pe * x[kXi2]);
    alg.Vf = std::clamp(vf, 0.0, ex.vf_max);
    return alg;
}

StateVector state_derivative(const StateVector& x, double r_load, const ModelParams& p) {
    const auto& e = p.engine;
    const auto& ex = p.exciter;
    const auto& g = p.gen;
    const AlgebraicOutputs alg = algebraic_outputs(x, r_load, p);
    const double t23 = e.T2 * e.T3;

    StateVector dx;
    dx[kQ1] = x[kQ2];
    dx[kQ2] = -x[kQ1] / t23 - (e.T2 + e.T3) / t23 * x[kQ2] + e.P_ref +
              e.m * (e.omega_ref - x[kOmega]);
    dx[kXi1] = x[kXi2];
    dx[kXi2] = -x[kXi2] / ex.T_V + (ex.V_tref - alg.Vt);
    dx[kOmega] = g.omega_s / (2.0 * g.H) *
                 (alg.Pm - x[kEqp] * alg.Iq - (g.X_q - g.X_dp) * alg.Id * alg.Iq -
                  g.D_f * x[kOmega]);
    dx[kEqp] = (-x[kEqp] - (g.X_d - g.X_dp) * alg.Id + alg.Vf) / g.T_dop;
    dx[kDelta] = x[kOmega] - g.omega_s;

    if (!dx.allFinite()) throw NonFiniteState("state derivative is not finite");
    return dx;
}

OutputVector output_map(const StateVector& x, double r_load, const ModelParams& p) {
    return {x[kOmega], solve_network(x[kEqp], r_load, p.gen).Vt};
}

StateVector steady_state(double r_load, const ModelParams& p) {
    if (!(r_load > 0.0)) throw NoEquilibrium("load resistance must be positive");
    const auto& e = p.engine;
    const auto& ex = p.exciter;
    const auto& g = p.gen;

    // Closed-form seed: q2 = xi2 = 0, integral action pins Vt to V_tref,
    // and the droop balance fixes the speed.
    const double gain = solve_network(1.0, r_load, g).Vt;
    if (!(gain > 0.0) || !std::isfinite(gain)) throw NoEquilibrium("network gain is degenerate");
    const double eqp = ex.V_tref / gain;
    const AlgebraicOutputs net = solve_network(eqp, r_load, g);
    const double pe = eqp * net.Iq + (g.X_q - g.X_dp) * net.Id * net.Iq;
    const double denom = e.m + g.D_f;
    if (denom == 0.0) throw NoEquilibrium("droop gain plus friction is zero");
    const double omega = (e.P_ref + e.m * e.omega_ref - pe) / denom;
    const double vf = eqp + (g.X_d - g.X_dp) * net.Id;
    const double vf_gain = ex.K_V * ex.K_ie / ex.T_V;

    Reduced y;
    y[kQ1] = e.T2 * e.T3 * (e.P_ref + e.m * (e.omega_ref - omega));
    y[kQ2] = 0.0;
    y[kXi1] = vf_gain != 0.0 ? std::clamp(vf, 0.0, ex.vf_max) / vf_gain : 0.0;
    y[kXi2] = 0.0;
    y[kOmega] = omega;
    y[kEqp] = eqp;
    if (!y.allFinite()) throw NoEquilibrium("steady-state seed is not finite");

    // Damped Newton polish; normally the seed is already an equilibrium.
    constexpr double kTol = 1e-10;
    constexpr int kMaxIter = 200;
    try {
        Reduced f = reduced_residual(y, r_load, p);
        for (int iter = 0; iter < kMaxIter; ++iter) {
            if (f.lpNorm<Eigen::Infinity>() <= kTol) {
                StateVector x;
                x.head<6>() = y;
                x[kDelta] = 0.0;
                return x;
            }
            Eigen::Matrix<double, 6, 6> jac;
            for (int j = 0; j < 6; ++j) {
                Reduced yp = y;
                const double step = 1e-7 * std::max(std::abs(y[j]), 1.0);
                yp[j] += step;
                jac.col(j) = (reduced_residual(yp, r_load, p) - f) / step;
            }
            const Reduced dy = jac.fullPivLu().solve(-f);
            if (!dy.allFinite()) break;
            double alpha = 1.0;
            const double norm0 = f.norm();
            bool improved = false;
            for (int k = 0; k < 30; ++k) {
                const Reduced trial = y + alpha * dy;
                const Reduced ft = reduced_residual(trial, r_load, p);
                if (ft.norm() < norm0) {
                    y = trial;
                    f = ft;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!improved) break;
        }
    } catch (const NonFiniteState&) {
    }
    throw NoEquilibrium("steady-state search did not converge at r_load = " +
                        std::to_string(r_load));
}

}  // namespace dgparam

#pragma once

// Seventh-order diesel generator model: proportional-droop diesel engine,
// AVR + PI exciter with output saturation, flux-decay synchronous machine,
// feeding a purely resistive load.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace dgparam {

struct EngineParams {
    double m = 40.0;          // droop gain
    double T1 = 0.025;        // s
    double T2 = 0.009;        // s
    double T3 = 0.038;        // s
    double P_ref = 1.0;       // p.u.
    double omega_ref = 1.0;   // p.u.
};

struct ExciterParams {
    double T_V = 0.05;        // s
    double K_V = 2.0;
    double K_pe = 5.0;
    double K_ie = 10.0;
    double V_tref = 1.0;      // p.u.
    double vf_max = 10.0;     // p.u.
};

struct GenParams {
    double H = 0.074;         // s
    double omega_s = 1.0;     // p.u.
    double D_f = 0.020;       // p.u.
    double X_d = 3.79;        // p.u.
    double X_q = 2.12;        // p.u.
    double X_dp = 0.342;      // p.u.
    double T_dop = 1.16;      // s
    double R_s = 0.04;        // p.u.
};

/// Every scalar of the model, addressable by name.
enum class Param : std::size_t {
    m, T1, T2, T3, P_ref, omega_ref,
    T_V, K_V, K_pe, K_ie, V_tref, vf_max,
    H, omega_s, D_f, X_d, X_q, X_dp, T_dop, R_s,
};

inline constexpr std::size_t kParamCount = 20;

std::string_view param_name(Param p);
std::optional<Param> param_from_name(std::string_view name);
std::array<Param, kParamCount> all_params();

/// Physical parameter values; defaults are the benchmark generator.
struct ModelParams {
    EngineParams engine;
    ExciterParams exciter;
    GenParams gen;

    double& operator[](Param p);
    double operator[](Param p) const;
};

/// Indices into StateVector.
enum StateIndex : Eigen::Index {
    kQ1 = 0, kQ2, kXi1, kXi2, kOmega, kEqp, kDelta,
};

inline constexpr Eigen::Index kStateCount = 7;

/// (q1, q2, xi1, xi2, omega, E'q, delta).
using StateVector = Eigen::Matrix<double, kStateCount, 1>;

struct AlgebraicOutputs {
    double Id = 0.0;
    double Iq = 0.0;
    double Vd = 0.0;
    double Vq = 0.0;
    double Vt = 0.0;
    double Pm = 0.0;
    double Vf = 0.0;
};

struct OutputVector {
    double f = 0.0;   // p.u., equals rotor speed
    double Vt = 0.0;  // p.u.
};

/// Solves the stator/load network for a resistive load. Fills Id, Iq, Vd,
/// Vq and Vt; Pm and Vf are left at zero.
AlgebraicOutputs solve_network(double Eqp, double r_load, const GenParams& gen);

/// Full algebraic state at x: network solution plus mechanical power and
/// the (clamped) excitation voltage.
AlgebraicOutputs algebraic_outputs(const StateVector& x, double r_load, const ModelParams& p);

/// Time derivative of the state. Throws NonFiniteState if any entry of the
/// result is not finite.
StateVector state_derivative(const StateVector& x, double r_load, const ModelParams& p);

OutputVector output_map(const StateVector& x, double r_load, const ModelParams& p);

/// Equilibrium under a constant load. delta is set to zero because no other
/// equation reads it. Throws NoEquilibrium when the root search fails.
StateVector steady_state(double r_load, const ModelParams& p);

/// True when every value is finite and T2, T3, T_V, H and T'do are
/// strictly positive (they divide in the state equations).
bool physically_valid(const ModelParams& p);

/// Load resistance (p.u.) drawing the given fraction of rated power at 1 p.u. voltage.
double resistance_from_power(double power_fraction);

}  // namespace dgparam

#pragma once

// Binds the generator model to the generic least-squares machinery: which
// parameters are free, the load tests with their measurements, and the
// stacked response y(theta) over all tests.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgparam/boxmap.hpp"
#include "dgparam/integrator.hpp"
#include "dgparam/model.hpp"
#include "dgparam/nlsq.hpp"

namespace dgparam {

/// Time-stamped per-unit frequency and terminal voltage.
struct MeasurementSeries {
    std::vector<double> time;
    std::vector<double> freq;
    std::vector<double> volt;
    std::string source;

    std::size_t size() const { return time.size(); }
    /// Mean sample rate (Hz); zero with fewer than two rows.
    double sample_rate() const;
};

/// Model values plus, for each parameter, whether and how it is estimated.
struct ParameterSet {
    ModelParams values;
    std::array<BoundSpec, kParamCount> bounds{};  // default: every entry Fixed

    BoundSpec& bound(Param p) { return bounds[static_cast<std::size_t>(p)]; }
    const BoundSpec& bound(Param p) const { return bounds[static_cast<std::size_t>(p)]; }

    /// Free parameters in estimation-vector order.
    std::vector<Param> free_params() const;
    std::vector<BoundSpec> free_bounds() const;
    Eigen::VectorXd free_values() const;
    /// Copy of values with the free entries replaced by theta.
    ModelParams with(const Eigen::VectorXd& theta) const;
    std::vector<std::string> free_names() const;
};

/// T2 and T3 enter the engine model only through T2+T3 and T2*T3, so a fit
/// determines the pair up to order. Reports list the smaller one as T2
/// when both are free with identical bounds. Returns true if it swapped.
bool order_engine_lags(const ParameterSet& params, Eigen::VectorXd& theta);

struct LoadTest {
    LoadStepProfile profile;
    MeasurementSeries data;
};

/// Simulates a test and returns its samples as a measurement series.
MeasurementSeries synthesize(const ModelParams& p, const LoadStepProfile& profile,
                             const SimConfig& cfg, const std::string& source = "simulated");

class DataContext {
public:
    /// Maps every measurement row to its nearest simulation sample. Rows
    /// more than 1e-9 s off the sample grid are counted in off_grid_rows().
    DataContext(ParameterSet params, std::vector<LoadTest> tests, SimConfig cfg);

    const ParameterSet& params() const { return params_; }
    const std::vector<LoadTest>& tests() const { return tests_; }
    const SimConfig& sim_config() const { return cfg_; }
    std::size_t off_grid_rows() const { return off_grid_rows_; }

    /// Stacked measurements, interleaved (f, V) per row, tests concatenated.
    const Eigen::VectorXd& measured() const { return measured_; }

    /// Stacked simulated outputs aligned with measured(); nullopt when the
    /// parameters are physically invalid or a simulation fails.
    std::optional<Eigen::VectorXd> response(const Eigen::VectorXd& theta) const;

    /// Full trajectories for every test; throws on simulation failure.
    std::vector<Trajectory> simulate_all(const Eigen::VectorXd& theta) const;

    LeastSquaresProblem problem() const;

private:
    ParameterSet params_;
    std::vector<LoadTest> tests_;
    SimConfig cfg_;
    std::vector<std::vector<std::size_t>> sample_index_;
    Eigen::VectorXd measured_;
    std::size_t off_grid_rows_ = 0;
};

}  // namespace dgparam

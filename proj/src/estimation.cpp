#include "dgparam/estimation.hpp"

#include <cmath>
#include <utility>

#include "dgparam/errors.hpp"

namespace dgparam {

double MeasurementSeries::sample_rate() const {
    if (time.size() < 2) return 0.0;
    return static_cast<double>(time.size() - 1) / (time.back() - time.front());
}

std::vector<Param> ParameterSet::free_params() const {
    std::vector<Param> out;
    for (Param p : all_params()) {
        if (bound(p).is_free()) out.push_back(p);
    }
    return out;
}

std::vector<BoundSpec> ParameterSet::free_bounds() const {
    std::vector<BoundSpec> out;
    for (Param p : free_params()) out.push_back(bound(p));
    return out;
}

Eigen::VectorXd ParameterSet::free_values() const {
    const auto ids = free_params();
    Eigen::VectorXd theta(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) theta[static_cast<Eigen::Index>(i)] = values[ids[i]];
    return theta;
}

ModelParams ParameterSet::with(const Eigen::VectorXd& theta) const {
    const auto ids = free_params();
    if (static_cast<std::size_t>(theta.size()) != ids.size()) {
        throw Error("parameter vector length does not match the free parameter count");
    }
    ModelParams out = values;
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = theta[static_cast<Eigen::Index>(i)];
    return out;
}

std::vector<std::string> ParameterSet::free_names() const {
    std::vector<std::string> out;
    for (Param p : free_params()) out.emplace_back(param_name(p));
    return out;
}

bool order_engine_lags(const ParameterSet& params, Eigen::VectorXd& theta) {
    const BoundSpec& b2 = params.bound(Param::T2);
    const BoundSpec& b3 = params.bound(Param::T3);
    if (!b2.is_free() || !b3.is_free() || b2.kind != b3.kind || b2.lo != b3.lo || b2.hi != b3.hi) {
        return false;
    }
    const auto ids = params.free_params();
    Eigen::Index i2 = -1;
    Eigen::Index i3 = -1;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == Param::T2) i2 = static_cast<Eigen::Index>(i);
        if (ids[i] == Param::T3) i3 = static_cast<Eigen::Index>(i);
    }
    if (theta[i2] <= theta[i3]) return false;
    std::swap(theta[i2], theta[i3]);
    return true;
}

MeasurementSeries synthesize(const ModelParams& p, const LoadStepProfile& profile,
                             const SimConfig& cfg, const std::string& source) {
    const Trajectory traj = simulate(p, profile, cfg);
    MeasurementSeries out;
    out.source = source;
    out.time = traj.times;
    out.freq.reserve(traj.outputs.size());
    out.volt.reserve(traj.outputs.size());
    for (const OutputVector& y : traj.outputs) {
        out.freq.push_back(y.f);
        out.volt.push_back(y.Vt);
    }
    return out;
}

DataContext::DataContext(ParameterSet params, std::vector<LoadTest> tests, SimConfig cfg)
    : params_(std::move(params)), tests_(std::move(tests)), cfg_(cfg) {
    cfg_.validate();
    validate_bounds(params_.free_bounds());
    const double period = cfg_.sample_period();
    const std::size_t last_sample = cfg_.step_count() / cfg_.sample_stride;

    std::size_t rows = 0;
    for (const LoadTest& test : tests_) {
        test.profile.validate();
        std::vector<std::size_t> index;
        index.reserve(test.data.size());
        for (double t : test.data.time) {
            const double k = std::round(t / period);
            if (k < 0.0 || k > static_cast<double>(last_sample)) {
                throw Error("measurement time " + std::to_string(t) +
                            " s lies outside the simulated horizon");
            }
            if (std::abs(k * period - t) > 1e-9) ++off_grid_rows_;
            index.push_back(static_cast<std::size_t>(k));
        }
        rows += index.size();
        sample_index_.push_back(std::move(index));
    }

    measured_.resize(static_cast<Eigen::Index>(2 * rows));
    Eigen::Index r = 0;
    for (const LoadTest& test : tests_) {
        for (std::size_t k = 0; k < test.data.size(); ++k) {
            measured_[r++] = test.data.freq[k];
            measured_[r++] = test.data.volt[k];
        }
    }
}

std::vector<Trajectory> DataContext::simulate_all(const Eigen::VectorXd& theta) const {
    const ModelParams p = params_.with(theta);
    std::vector<Trajectory> out;
    out.reserve(tests_.size());
    for (const LoadTest& test : tests_) out.push_back(simulate(p, test.profile, cfg_));
    return out;
}

std::optional<Eigen::VectorXd> DataContext::response(const Eigen::VectorXd& theta) const {
    const ModelParams p = params_.with(theta);
    if (!physically_valid(p)) return std::nullopt;
    Eigen::VectorXd y(measured_.size());
    Eigen::Index r = 0;
    try {
        for (std::size_t t = 0; t < tests_.size(); ++t) {
            const Trajectory traj = simulate(p, tests_[t].profile, cfg_);
            for (std::size_t k : sample_index_[t]) {
                y[r++] = traj.outputs[k].f;
                y[r++] = traj.outputs[k].Vt;
            }
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return y;
}

LeastSquaresProblem DataContext::problem() const {
    LeastSquaresProblem out;
    out.measured = measured_;
    out.channels = 2;
    out.response = [this](const Eigen::VectorXd& theta) { return response(theta); };
    return out;
}

}  // namespace dgparam

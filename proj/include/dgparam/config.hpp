#pragma once

// Fit configuration files (INI layout):
//
//   [parameters]
//   m   = 120 [0, inf]
//   T1  = 0.125 [0, 0.5]
//   X_d = 3.79 fixed
//   [profile]
//   power_steps = 0.3 0.8 1.0; 0.8 0.3 1.0
//   [sim]        t_end, h, sample_stride
//   [ga]         population, generations, mutate_fraction, elite, caps = m:100, K_V:10
//   [stopping]   max_iterations, rel_cost_tol
//   [seed]       value
//   [solver]     method = hbclm | bclm, column_scaling = true
//
// A bare value also fixes a parameter; unlisted ones keep their benchmark
// defaults and are fixed. profile takes power_steps or resistance_steps,
// "pre post t_step" per load test. Lines starting with ';' are comments.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgparam/estimation.hpp"
#include "dgparam/golga.hpp"
#include "dgparam/hbclm.hpp"
#include "dgparam/integrator.hpp"

namespace dgparam {

enum class Method { Hbclm, Bclm };

std::string to_string(Method method);

struct FitConfig {
    ParameterSet params;
    std::vector<LoadStepProfile> profiles;
    SimConfig sim;
    GaConfig ga;
    StoppingCriteria stopping;
    std::uint64_t seed = 1;
    Method method = Method::Hbclm;
    bool column_scaling = true;

    /// Checks bounds (naming the parameter), the profiles and the sim grid.
    void validate() const;
};

FitConfig parse_config(std::istream& in);
FitConfig parse_config(const std::filesystem::path& path);

/// Text that parse_config reads back to an equivalent configuration.
std::string write_config(const FitConfig& config);

/// Throws OutOfBounds naming the first free parameter whose value lies
/// outside its bounds.
void check_initial_values(const ParameterSet& params);

}  // namespace dgparam

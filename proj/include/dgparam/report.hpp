#pragma once

// Fit reports: a readable summary followed by a key=value block for scripts.

#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "dgparam/estimation.hpp"
#include "dgparam/hbclm.hpp"

namespace dgparam {

/// Smallest over largest eigenvalue; ratios below this are rank deficient.
inline constexpr double kRankDeficientRatio = 1e-9;

/// smallest/largest of a spectrum (NaN when empty or the largest is zero).
double spectrum_ratio(const Eigen::VectorXd& spectrum);
std::string rank_verdict(double ratio);

void write_report(std::ostream& out, const FitReport& report, const ParameterSet& params,
                  const std::string& method);

/// Prints the descending spectrum and the condition indicator.
void write_spectrum(std::ostream& out, const Eigen::VectorXd& spectrum);

}  // namespace dgparam

#pragma once

// Measurement and trajectory files: delimiter-separated text with a
// `time_s,freq_pu,volt_pu` header and `#` comment lines.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgparam/estimation.hpp"
#include "dgparam/integrator.hpp"

namespace dgparam {

/// Minimum row count for a series used in a fit.
inline constexpr std::size_t kMinFitRows = 10;

/// Parses a measurement table. Accepts ',', ';' or tab as delimiter (taken
/// from the header line). A `# source: <label>` comment sets the source.
/// Throws ParseError(line, reason) or NonMonotonicTime(line).
MeasurementSeries parse_measurements(std::istream& in);
MeasurementSeries parse_measurements(const std::filesystem::path& path);

/// Writes the shortest representation that parses back to the same doubles.
void write_measurements(std::ostream& out, const MeasurementSeries& series);
void write_measurements(const std::filesystem::path& path, const MeasurementSeries& series);

/// Throws Error unless the series has at least kMinFitRows rows.
void require_fit_length(const MeasurementSeries& series, const std::string& label);

/// time_s, measured f/V, fitted f/V per measurement row. The fitted value
/// is the simulated sample nearest in time.
void write_fit_trajectory(std::ostream& out, const MeasurementSeries& measured,
                          const Trajectory& fitted);

/// Shortest round-trip text for a double.
std::string format_double(double value);

}  // namespace dgparam

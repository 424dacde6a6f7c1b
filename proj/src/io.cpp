#include "dgparam/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "dgparam/errors.hpp"

namespace dgparam {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view field, std::size_t line, const char* column) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(line, std::string("cannot read ") + column + " value '" +
                                   std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
        throw ParseError(line, std::string(column) + " value is not finite");
    }
    return value;
}

}  // namespace

MeasurementSeries parse_measurements(std::istream& in) {
    MeasurementSeries series;
    std::string raw;
    std::size_t line = 0;
    char delim = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const std::string_view body = trim(text.substr(1));
            constexpr std::string_view key = "source:";
            if (body.substr(0, key.size()) == key) series.source = trim(body.substr(key.size()));
            continue;
        }
        if (delim == 0) {
            for (char c : {',', ';', '\t'}) {
                if (text.find(c) != std::string_view::npos) {
                    delim = c;
                    break;
                }
            }
            const auto names = delim ? split(text, delim) : std::vector<std::string_view>{text};
            if (names.size() != 3 || names[0] != "time_s" || names[1] != "freq_pu" ||
                names[2] != "volt_pu") {
                throw ParseError(line, "expected header 'time_s,freq_pu,volt_pu'");
            }
            continue;
        }
        const auto fields = split(text, delim);
        if (fields.size() != 3) {
            throw ParseError(line, "expected 3 fields, found " + std::to_string(fields.size()));
        }
        const double t = parse_number(fields[0], line, "time_s");
        const double f = parse_number(fields[1], line, "freq_pu");
        const double v = parse_number(fields[2], line, "volt_pu");
        if (!series.time.empty() && !(t > series.time.back())) throw NonMonotonicTime(line);
        series.time.push_back(t);
        series.freq.push_back(f);
        series.volt.push_back(v);
    }
    if (delim == 0) throw ParseError(line, "missing header 'time_s,freq_pu,volt_pu'");
    if (series.time.empty()) throw ParseError(line, "no data rows");
    return series;
}

MeasurementSeries parse_measurements(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open measurement file " + path.string());
    MeasurementSeries series = parse_measurements(in);
    if (series.source.empty()) series.source = path.filename().string();
    return series;
}

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

void write_measurements(std::ostream& out, const MeasurementSeries& series) {
    if (!series.source.empty()) out << "# source: " << series.source << '\n';
    out << "time_s,freq_pu,volt_pu\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_double(series.time[i]) << ',' << format_double(series.freq[i]) << ','
            << format_double(series.volt[i]) << '\n';
    }
}

void write_measurements(const std::filesystem::path& path, const MeasurementSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_measurements(out, series);
    if (!out) throw Error("write failed for " + path.string());
}

void require_fit_length(const MeasurementSeries& series, const std::string& label) {
    if (series.size() < kMinFitRows) {
        throw Error(label + ": " + std::to_string(series.size()) + " rows, at least " +
                    std::to_string(kMinFitRows) + " are needed for a fit");
    }
}

void write_fit_trajectory(std::ostream& out, const MeasurementSeries& measured,
                          const Trajectory& fitted) {
    out << "time_s,freq_meas_pu,volt_meas_pu,freq_fit_pu,volt_fit_pu\n";
    if (fitted.times.empty()) return;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const double t = measured.time[i];
        auto it = std::lower_bound(fitted.times.begin(), fitted.times.end(), t);
        if (it == fitted.times.end()) {
            --it;
        } else if (it != fitted.times.begin() && t - *(it - 1) < *it - t) {
            --it;
        }
        const auto k = static_cast<std::size_t>(it - fitted.times.begin());
        out << format_double(t) << ',' << format_double(measured.freq[i]) << ','
            << format_double(measured.volt[i]) << ',' << format_double(fitted.outputs[k].f) << ','
            << format_double(fitted.outputs[k].Vt) << '\n';
    }
}

}  // namespace dgparam

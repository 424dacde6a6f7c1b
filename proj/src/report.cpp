#include "dgparam/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "dgparam/io.hpp"

namespace dgparam {

namespace {

bool has(const std::vector<std::size_t>& list, std::size_t i) {
    return std::find(list.begin(), list.end(), i) != list.end();
}

template <typename T>
void write_list(std::ostream& out, const std::string& key, const T& values) {
    out << key << '=';
    bool first = true;
    for (const auto& v : values) {
        if (!first) out << ',';
        out << format_double(v);
        first = false;
    }
    out << '\n';
}

}  // namespace

double spectrum_ratio(const Eigen::VectorXd& spectrum) {
    if (spectrum.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    const double top = spectrum.maxCoeff();
    if (!(top > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return spectrum.minCoeff() / top;
}

std::string rank_verdict(double ratio) {
    return std::isfinite(ratio) && ratio >= kRankDeficientRatio ? "OK" : "RANK-DEFICIENT";
}

void write_spectrum(std::ostream& out, const Eigen::VectorXd& spectrum) {
    out << "eigenvalues of S^T S (descending):\n";
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        out << "  " << std::setw(3) << i + 1 << "  " << std::scientific << std::setprecision(6)
            << spectrum[i] << '\n';
    }
    out << std::defaultfloat;
    const double ratio = spectrum_ratio(spectrum);
    out << "smallest/largest = " << std::scientific << std::setprecision(3) << ratio
        << std::defaultfloat << "  " << rank_verdict(ratio) << '\n';
}

void write_report(std::ostream& out, const FitReport& report, const ParameterSet& params,
                  const std::string& method) {
    const auto ids = params.free_params();
    out << "method: " << method << '\n';
    out << "status: " << (report.converged ? "converged" : "not converged") << " ("
        << to_string(report.reason) << ")\n";
    if (!report.detail.empty()) out << "detail: " << report.detail << '\n';
    out << "iterations: " << report.iterations_ga << " GA + " << report.iterations_bclm
        << " LM = " << report.total_iterations() << '\n';
    out << "cost: " << format_double(report.final_cost) << '\n';
    out << "rmse: f " << format_double(report.rmse.f) << " p.u., V " << format_double(report.rmse.v)
        << " p.u.\n\n";

    out << "parameter        value            bounds              flags\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::string flags;
        if (has(report.at_bound, i)) flags += " at-bound";
        if (has(report.low_sensitivity, i)) flags += " low-sensitivity";
        if (has(report.weakly_identified, i)) flags += " weakly-identified";
        if (has(report.fd_failed_columns, i)) flags += " fd-failed";
        const auto idx = static_cast<Eigen::Index>(i);
        out << std::left << std::setw(16) << param_name(ids[i]) << ' ' << std::setw(16)
            << format_double(report.theta_final[idx]) << ' ' << std::setw(19)
            << params.bound(ids[i]).describe() << flags << '\n';
    }
    out << std::right << '\n';
    if (report.spectrum.size() > 0) write_spectrum(out, report.spectrum);

    out << "\n[result]\n";
    out << "method=" << method << '\n';
    out << "converged=" << (report.converged ? 1 : 0) << '\n';
    out << "reason=" << to_string(report.reason) << '\n';
    out << "cost=" << format_double(report.final_cost) << '\n';
    out << "rmse_f=" << format_double(report.rmse.f) << '\n';
    out << "rmse_v=" << format_double(report.rmse.v) << '\n';
    out << "iterations_ga=" << report.iterations_ga << '\n';
    out << "iterations_bclm=" << report.iterations_bclm << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << "param." << param_name(ids[i]) << '='
            << format_double(report.theta_final[static_cast<Eigen::Index>(i)]) << '\n';
    }
    const double ratio = spectrum_ratio(report.spectrum);
    out << "spectrum_ratio=" << (std::isfinite(ratio) ? format_double(ratio) : "nan") << '\n';
    write_list(out, "cost_trace", report.cost_trace);
    write_list(out, "lambda_trace", report.lambda_trace);
    write_list(out, "ga_cost_trace", report.ga_cost_trace);
    auto names = [&](const std::vector<std::size_t>& list) {
        std::string s;
        for (std::size_t i : list) s += (s.empty() ? "" : ",") + std::string(param_name(ids[i]));
        return s;
    };
    out << "at_bound=" << names(report.at_bound) << '\n';
    out << "low_sensitivity=" << names(report.low_sensitivity) << '\n';
    out << "weakly_identified=" << names(report.weakly_identified) << '\n';
    out << "fd_failed=" << names(report.fd_failed_columns) << '\n';
}

}  // namespace dgparam

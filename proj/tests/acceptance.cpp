// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Every check recomputes its verdict from the returned estimates and fresh
// simulations instead of reusing the benchmark module's own verdicts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgparam/benchmark.hpp"
#include "dgparam/boxmap.hpp"
#include "dgparam/errors.hpp"
#include "dgparam/estimation.hpp"
#include "dgparam/golga.hpp"
#include "dgparam/hbclm.hpp"
#include "dgparam/integrator.hpp"
#include "dgparam/model.hpp"
#include "dgparam/nlsq.hpp"

using namespace dgparam;
namespace bm = dgparam::benchmark;

namespace {

int failures = 0;

void verdict(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << "  [" << detail << "]"
              << std::endl;
    if (!pass) ++failures;
}

void note(const std::string& text) { std::cout << "      " << text << std::endl; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Bench {
    ParameterSet set = bm::parameters();
    std::vector<LoadTest> tests = bm::synthetic_tests();
    DataContext ctx{set, tests, bm::sim_config()};
    LeastSquaresProblem problem = ctx.problem();
    std::vector<BoundSpec> specs = set.free_bounds();
    std::vector<Param> ids = set.free_params();
    Eigen::VectorXd truth;

    Bench() {
        // Truth straight from the benchmark row, not from the module's helper.
        truth.resize(static_cast<Eigen::Index>(ids.size()));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t c = 0; c < bm::kTableParams.size(); ++c) {
                if (bm::kTableParams[c] == ids[i]) truth[static_cast<Eigen::Index>(i)] = bm::kTruth[c];
            }
        }
    }

    bool is_exciter_gain(std::size_t i) const {
        return ids[i] == Param::K_V || ids[i] == Param::K_pe || ids[i] == Param::K_ie;
    }
};

// Lists the smaller engine lag as T2, the convention used in every report.
Eigen::VectorXd canonical(const Bench& b, Eigen::VectorXd theta) {
    order_engine_lags(b.set, theta);
    return theta;
}

struct Recovery {
    double worst = 0.0;
    std::string worst_name;
    std::vector<std::string> outside;
};

Recovery recovery(const Bench& b, const Eigen::VectorXd& est, double tol, bool skip_exciter = false) {
    Recovery r;
    for (std::size_t i = 0; i < b.ids.size(); ++i) {
        if (skip_exciter && b.is_exciter_gain(i)) continue;
        const auto k = static_cast<Eigen::Index>(i);
        const double rel = std::abs(est[k] - b.truth[k]) / std::abs(b.truth[k]);
        if (!(rel <= r.worst) || r.worst_name.empty()) {
            r.worst = std::isfinite(rel) ? std::max(rel, r.worst) : INFINITY;
            r.worst_name = std::string(param_name(b.ids[i]));
        }
        if (!(rel <= tol)) r.outside.push_back(std::string(param_name(b.ids[i])) + "=" + fmt(est[k]));
    }
    return r;
}

std::string describe(const Recovery& r) {
    std::string s = "max rel err " + fmt(r.worst) + " (" + r.worst_name + ")";
    if (!r.outside.empty()) {
        s += "; outside:";
        for (const std::string& o : r.outside) s += " " + o;
    }
    return s;
}

// K_V*K_pe and K_V*K_ie, the combinations the outputs actually determine.
std::string products(const Bench& b, const Eigen::VectorXd& est) {
    double kv = 0, kpe = 0, kie = 0;
    for (std::size_t i = 0; i < b.ids.size(); ++i) {
        const double v = est[static_cast<Eigen::Index>(i)];
        if (b.ids[i] == Param::K_V) kv = v;
        if (b.ids[i] == Param::K_pe) kpe = v;
        if (b.ids[i] == Param::K_ie) kie = v;
    }
    const double e1 = std::abs(kv * kpe - 10.0) / 10.0, e2 = std::abs(kv * kie - 20.0) / 20.0;
    return "K_V*K_pe = " + fmt(kv * kpe) + " (truth 10, rel err " + fmt(e1) + "), K_V*K_ie = " + fmt(kv * kie) +
           " (truth 20, rel err " + fmt(e2) + ")";
}

bool in_bounds(const Bench& b, const Eigen::VectorXd& theta) {
    for (std::size_t i = 0; i < b.specs.size(); ++i) {
        if (!b.specs[i].contains(theta[static_cast<Eigen::Index>(i)])) return false;
    }
    return true;
}

// Per-channel RMSE of a fresh simulation against the given measurements.
std::pair<double, double> rmse_against(const Bench& b, const Eigen::VectorXd& theta,
                                       const std::vector<LoadTest>& data) {
    const ModelParams p = b.set.with(theta);
    double sf = 0.0, sv = 0.0;
    std::size_t n = 0;
    for (const LoadTest& t : data) {
        const Trajectory traj = simulate(p, t.profile, bm::sim_config());
        if (traj.outputs.size() != t.data.size()) return {INFINITY, INFINITY};
        for (std::size_t k = 0; k < traj.outputs.size(); ++k) {
            sf += std::pow(traj.outputs[k].f - t.data.freq[k], 2);
            sv += std::pow(traj.outputs[k].Vt - t.data.volt[k], 2);
            ++n;
        }
    }
    return {std::sqrt(sf / n), std::sqrt(sv / n)};
}

void criterion1(const Bench& b) {
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd start = bm::initial_theta(b.set, 1);
    const StoppingCriteria stop;
    const FitReport lm = lm_solve_unconstrained(b.problem, start, stop);
    const FitReport bc = bclm_solve(b.problem, start, b.specs, stop);
    const Recovery rl = recovery(b, canonical(b, lm.theta_final), bm::kCase1Tolerance);
    const Recovery rb = recovery(b, canonical(b, bc.theta_final), bm::kCase1Tolerance);
    const bool pass = rl.outside.empty() && rb.outside.empty();
    verdict(1, "case 1, LM and BCLM recover every free parameter within 1%", pass,
            "LM " + describe(rl) + " | BCLM " + describe(rb) + " | " + fmt(seconds_since(t0)) + " s");
    note("LM   cost " + fmt(lm.final_cost) + ", " + products(b, lm.theta_final));
    note("BCLM cost " + fmt(bc.final_cost) + ", " + products(b, bc.theta_final));
    const Recovery nl = recovery(b, canonical(b, lm.theta_final), bm::kCase1Tolerance, true);
    const Recovery nb = recovery(b, canonical(b, bc.theta_final), bm::kCase1Tolerance, true);
    note("without K_V, K_pe, K_ie: LM " + describe(nl) + " | BCLM " + describe(nb));
}

void criterion2(const Bench& b) {
    const Eigen::VectorXd start = bm::initial_theta(b.set, 2);
    const StoppingCriteria stop;
    const FitReport lm = lm_solve_unconstrained(b.problem, start, stop);
    const FitReport bc = bclm_solve(b.problem, start, b.specs, stop);

    bool lm_infeasible = false;
    std::string lm_detail;
    for (std::size_t i = 0; i < b.ids.size(); ++i) {
        if (b.ids[i] != Param::T1 && b.ids[i] != Param::T3 && b.ids[i] != Param::D_f) continue;
        const auto k = static_cast<Eigen::Index>(i);
        const double v = lm.theta_final[k];
        lm_detail += std::string(lm_detail.empty() ? "" : " ") + std::string(param_name(b.ids[i])) + "=" + fmt(v);
        if (!std::isfinite(v) || v < 0.0 || std::abs(v) > 100.0 * b.truth[k]) lm_infeasible = true;
    }

    const Eigen::VectorXd est = canonical(b, bc.theta_final);
    const bool feasible = in_bounds(b, est);
    const auto [rf, rv] = rmse_against(b, est, b.tests);
    const bool fit_ok = rf <= bm::kCase2Rmse && rv <= bm::kCase2Rmse;
    const Recovery rest = recovery(b, est, bm::kCase2Tolerance, true);

    bool gains_flagged = true;
    std::string flags;
    for (std::size_t i = 0; i < b.ids.size(); ++i) {
        if (!b.is_exciter_gain(i)) continue;
        const auto k = static_cast<Eigen::Index>(i);
        if (std::abs(est[k] - b.truth[k]) <= bm::kCase2Tolerance * b.truth[k]) continue;
        const auto has = [i](const std::vector<std::size_t>& v) { return std::find(v.begin(), v.end(), i) != v.end(); };
        const bool low = has(bc.low_sensitivity), weak = has(bc.weakly_identified);
        flags += std::string(param_name(b.ids[i])) + "=" + fmt(est[k]) + (low ? " low-sensitivity" : "") +
                 (weak ? " weakly-identified" : "") + (!low && !weak ? " UNFLAGGED" : "") + "; ";
        if (!low && !weak) gains_flagged = false;
    }

    const bool pass = lm_infeasible && feasible && fit_ok && rest.outside.empty() && gains_flagged;
    verdict(2, "case 2, LM infeasible; BCLM in bounds, rmse <= 1e-4, non-exciter within 5%", pass,
            "LM " + lm_detail + (lm_infeasible ? " (infeasible)" : " (plausible)") + " | BCLM " +
                (feasible ? "in bounds" : "OUT OF BOUNDS") + ", rmse f " + fmt(rf) + " V " + fmt(rv) + ", " +
                describe(rest));
    note("exciter gains: " + (flags.empty() ? std::string("agree with truth") : flags));
    note("the column-norm test alone (< 1e-6 of the largest) does not fire on these gains; "
         "the flag comes from the near-null eigenvector of the scaled normal matrix");
    note("BCLM " + products(b, est));
}

void criterion3(const Bench& b) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = 1;
    const FitReport r = hbclm_fit(b.problem, b.specs, bm::ga_config(b.set), StoppingCriteria{}, seed);
    const Eigen::VectorXd est = canonical(b, r.theta_final);
    const Recovery rec = recovery(b, est, bm::kCase4Tolerance);
    const bool budget = r.converged && r.total_iterations() <= bm::kCase4IterationBudget;
    verdict(3, "case 4, H-BCLM recovers every parameter within 2% in <= 60 iterations",
            rec.outside.empty() && budget,
            describe(rec) + " | " + (r.converged ? "converged" : "not converged") + ", " +
                std::to_string(r.iterations_ga) + " GA + " + std::to_string(r.iterations_bclm) + " BCLM | " +
                fmt(seconds_since(t0)) + " s");
    note("cost " + fmt(r.final_cost) + ", " + products(b, est));
    note("without K_V, K_pe, K_ie: " + describe(recovery(b, est, bm::kCase4Tolerance, true)));
}

void criterion4(const Bench& b) {
    const ResidualSet r = objective(b.problem, b.truth);
    const SensitivityMatrix s = fd_sensitivity(b.problem, b.truth, r.simulated);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.entries.transpose() * s.entries,
                                                        Eigen::EigenvaluesOnly);
    const double ratio = eig.eigenvalues().minCoeff() / eig.eigenvalues().maxCoeff();
    bool gn_ok = false;
    std::string gn_detail;
    try {
        // Any nonzero residual will do; the normal matrix is the point.
        const Eigen::VectorXd step = gn_step(s.entries, Eigen::VectorXd::Ones(s.entries.rows()));
        gn_ok = step.norm() > 1e6;
        gn_detail = "gn step norm " + fmt(step.norm());
    } catch (const SingularNormalMatrix& e) {
        gn_ok = true;
        gn_detail = "gn_step raised SingularNormalMatrix (condition " + fmt(e.condition()) + ")";
    }
    verdict(4, "eigenvalue ratio of S^T S at truth < 1e-9 and GN step fails", ratio < 1e-9 && gn_ok,
            "ratio " + fmt(ratio) + ", " + gn_detail);
}

void criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<BoundSpec> kinds = {BoundSpec::two_sided(0.0, 0.5), BoundSpec::two_sided(-3.0, 7.0),
                                          BoundSpec::lower(0.05), BoundSpec::upper(0.15)};
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double round_trip = 0.0, jac = 0.0;
    bool bounded = true;
    for (const BoundSpec& s : kinds) {
        for (int i = 0; i < 1000; ++i) {
            double theta = 0.0;
            switch (s.kind) {
                case BoundKind::TwoSided: theta = s.lo + (s.hi - s.lo) * u(rng); break;
                case BoundKind::LowerOnly: theta = s.lo + 100.0 * u(rng); break;
                case BoundKind::UpperOnly: theta = s.hi - 100.0 * u(rng); break;
                case BoundKind::Fixed: break;
            }
            round_trip = std::max(round_trip, std::abs(forward(inverse(theta, s), s) - theta));

            const double beta = 6.0 * u(rng) - 3.0, h = 1e-5;
            const double fd = (forward(beta + h, s) - forward(beta - h, s)) / (2.0 * h);
            jac = std::max(jac, std::abs(mapping_derivative(beta, s) - fd) / std::max(1.0, std::abs(fd)));
        }
        for (double beta : {1e6, -1e6, 1.0, -1.0, 0.0}) {
            const double t = forward(beta, s);
            bounded = bounded && std::isfinite(t) && s.contains(t);
        }
    }
    const double secs = seconds_since(t0);
    verdict(5, "box maps: round trip <= 1e-12, bounded images, derivative vs central FD <= 1e-8, < 1 s",
            round_trip <= 1e-12 && bounded && jac <= 1e-8 && secs < 1.0,
            "round trip " + fmt(round_trip) + ", derivative " + fmt(jac) + ", " +
                (bounded ? "bounded" : "UNBOUNDED") + ", " + fmt(secs) + " s");
}

void criterion6() {
    const auto t0 = std::chrono::steady_clock::now();
    using S = Eigen::Matrix<double, 1, 1>;
    const auto f = [](double, const S& y) -> S { return -y; };
    std::vector<double> err;
    for (double h : {0.1, 0.05, 0.025}) {
        S y;
        y << 1.0;
        const int steps = static_cast<int>(std::lround(1.0 / h));
        for (int k = 0; k < steps; ++k) y = rk4_step(f, y, k * h, h);
        err.push_back(std::abs(y[0] - std::exp(-1.0)));
    }
    const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
    const double secs = seconds_since(t0);
    verdict(6, "RK4 order on y' = -y in [3.8, 4.2], < 1 s",
            p1 >= 3.8 && p1 <= 4.2 && p2 >= 3.8 && p2 <= 4.2 && secs < 1.0,
            "orders " + fmt(p1) + ", " + fmt(p2) + ", " + fmt(secs) + " s");
}

void criterion7() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> times = {0.5, 1.0, 2.0};
    const double h = 1e-3;
    const LeastSquaresProblem p{[&](const Eigen::VectorXd& th) -> std::optional<Eigen::VectorXd> {
                                    using S = Eigen::Matrix<double, 1, 1>;
                                    const auto f = [&](double, const S& y) -> S { return -th[0] * y; };
                                    S y;
                                    y << 1.0;
                                    Eigen::VectorXd out(3);
                                    int next = 0;
                                    for (int k = 0; next < 3; ++k) {
                                        if (std::abs(k * h - times[next]) < 1e-9) out[next++] = y[0];
                                        y = rk4_step(f, y, k * h, h);
                                    }
                                    return out;
                                },
                                Eigen::VectorXd::Zero(3), 1};
    double worst = 0.0;
    for (double theta : {0.5, 1.0, 2.0}) {
        const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, theta);
        const SensitivityMatrix s = fd_sensitivity(p, th, *p.response(th));
        for (int k = 0; k < 3; ++k) {
            const double exact = -times[k] * std::exp(-theta * times[k]);
            worst = std::max(worst, std::abs(s.entries(k, 0) - exact) / std::abs(exact));
        }
    }
    const double secs = seconds_since(t0);
    verdict(7, "FD sensitivity of y' = -theta y vs -t exp(-theta t) within 1e-4 relative, < 1 s",
            worst <= 1e-4 && secs < 1.0, "worst rel err " + fmt(worst) + ", " + fmt(secs) + " s");
}

void criterion8() {
    const ModelParams p;  // benchmark values
    double worst = 0.0;
    std::string detail;
    for (double r : {3.333, 1.25}) {
        const StateVector x = steady_state(r, p);
        StateVector d = state_derivative(x, r, p);
        d[kDelta] = 0.0;
        worst = std::max(worst, d.norm());
        detail += "r=" + fmt(r) + ": " + fmt(d.norm()) + " ";
    }
    verdict(8, "steady-state derivative norm (without delta) <= 1e-8", worst <= 1e-8, detail);
}

void criterion9() {
    const std::vector<BoundSpec> specs(5, BoundSpec::two_sided(-5.0, 5.0));
    GaConfig cfg;
    cfg.population = 40;
    cfg.generations = 10;
    const auto sphere = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    int improved = 0, beats = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const GaResult r = run_ga(sphere, specs, cfg, seed, false);
        if (r.best.cost * 10.0 <= r.best_cost_trace.front()) ++improved;
        std::mt19937_64 rng(seed + 5000);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        double best = INFINITY;
        for (std::size_t e = 0; e < r.evaluations; ++e) {
            Eigen::VectorXd x(5);
            for (int i = 0; i < 5; ++i) x[i] = u(rng);
            best = std::min(best, sphere(x));
        }
        if (r.best.cost < best) ++beats;
    }
    verdict(9, "GA on a 5-d sphere: >= 10x improvement, beats random search in >= 9/10 seeds",
            improved == 10 && beats >= 9,
            "10x improvement in " + std::to_string(improved) + "/10, beats random in " + std::to_string(beats) +
                "/10");
}

void criterion10(const Bench& b) {
    const double sigma = 1e-3;
    const std::vector<LoadTest> noisy = bm::synthetic_tests({}, sigma, 7);
    const DataContext ctx(b.set, noisy, bm::sim_config());
    const FitReport r = hbclm_fit(ctx.problem(), b.specs, bm::ga_config(b.set), StoppingCriteria{}, 7);
    const auto [rf, rv] = rmse_against(b, r.theta_final, noisy);
    const bool pass = r.converged && rf <= 3.0 * sigma && rv <= 3.0 * sigma;
    verdict(10, "noise sigma 1e-3: H-BCLM converges with per-channel rmse <= 3e-3", pass,
            std::string(r.converged ? "converged" : "not converged") + ", rmse f " + fmt(rf) + " V " + fmt(rv));
}

}  // namespace

int main() {
    try {
        const Bench bench;
        criterion1(bench);
        criterion2(bench);
        criterion3(bench);
        criterion4(bench);
        criterion5();
        criterion6();
        criterion7();
        criterion8();
        criterion9();
        criterion10(bench);
    } catch (const std::exception& e) {
        std::cout << "FAIL  acceptance run aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}

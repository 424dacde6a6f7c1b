#include "dgparam/boxmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dgparam/errors.hpp"

namespace dgparam {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// sin(pi*beta/2) has period 4; reducing first makes the map exactly periodic.
double reduce_period(double beta) { return std::remainder(beta, 4.0); }

}  // namespace

BoundSpec BoundSpec::from_limits(double lo, double hi) {
    const bool has_lo = std::isfinite(lo);
    const bool has_hi = std::isfinite(hi);
    if (has_lo && has_hi) return two_sided(lo, hi);
    if (has_lo) return lower(lo);
    if (has_hi) return upper(hi);
    throw BadBounds("at least one finite bound is required for a free parameter");
}

bool BoundSpec::contains(double theta) const {
    switch (kind) {
        case BoundKind::Fixed: return true;
        case BoundKind::TwoSided: return theta >= lo && theta <= hi;
        case BoundKind::LowerOnly: return theta >= lo;
        case BoundKind::UpperOnly: return theta <= hi;
    }
    return false;
}

double BoundSpec::lower_limit() const {
    return kind == BoundKind::TwoSided || kind == BoundKind::LowerOnly
               ? lo
               : -std::numeric_limits<double>::infinity();
}

double BoundSpec::upper_limit() const {
    return kind == BoundKind::TwoSided || kind == BoundKind::UpperOnly
               ? hi
               : std::numeric_limits<double>::infinity();
}

std::string BoundSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case BoundKind::Fixed: os << "fixed"; break;
        case BoundKind::TwoSided: os << "[" << lo << ", " << hi << "]"; break;
        case BoundKind::LowerOnly: os << "[" << lo << ", inf]"; break;
        case BoundKind::UpperOnly: os << "[-inf, " << hi << "]"; break;
    }
    return os.str();
}

void validate_bounds(std::span<const BoundSpec> specs) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const BoundSpec& s = specs[i];
        if (s.kind == BoundKind::TwoSided && !(s.lo < s.hi)) {
            throw BadBounds("entry " + std::to_string(i) + ": lower bound " + std::to_string(s.lo) +
                            " is not below upper bound " + std::to_string(s.hi));
        }
        if ((s.kind == BoundKind::TwoSided || s.kind == BoundKind::LowerOnly) && !std::isfinite(s.lo)) {
            throw BadBounds("entry " + std::to_string(i) + ": lower bound is not finite");
        }
        if ((s.kind == BoundKind::TwoSided || s.kind == BoundKind::UpperOnly) && !std::isfinite(s.hi)) {
            throw BadBounds("entry " + std::to_string(i) + ": upper bound is not finite");
        }
    }
}

double forward(double beta, const BoundSpec& spec) {
    switch (spec.kind) {
        case BoundKind::Fixed:
            return beta;
        case BoundKind::TwoSided: {
            const double t = 0.5 * (spec.hi - spec.lo) * std::sin(kHalfPi * reduce_period(beta)) +
                             0.5 * (spec.hi + spec.lo);
            return std::clamp(t, spec.lo, spec.hi);
        }
        // sqrt(beta^2 + 1) - 1 as beta^2 / (sqrt(beta^2 + 1) + 1): exact at beta = 0
        // and no overflow for huge beta.
        case BoundKind::LowerOnly:
            return spec.lo + beta * (beta / (std::hypot(beta, 1.0) + 1.0));
        case BoundKind::UpperOnly:
            return spec.hi - beta * (beta / (std::hypot(beta, 1.0) + 1.0));
    }
    return beta;
}

double inverse(double theta, const BoundSpec& spec) {
    if (spec.kind != BoundKind::Fixed && (!std::isfinite(theta) || !spec.contains(theta))) {
        throw OutOfBounds(0, "value " + std::to_string(theta) + " violates bound " + spec.describe());
    }
    switch (spec.kind) {
        case BoundKind::Fixed:
            return theta;
        case BoundKind::TwoSided: {
            const double s = (2.0 * theta - (spec.hi + spec.lo)) / (spec.hi - spec.lo);
            return std::asin(std::clamp(s, -1.0, 1.0)) / kHalfPi;
        }
        case BoundKind::LowerOnly: {
            // sqrt((d + 1)^2 - 1) written without cancellation.
            const double d = theta - spec.lo;
            return std::sqrt(d * (d + 2.0));
        }
        case BoundKind::UpperOnly: {
            const double d = spec.hi - theta;
            return std::sqrt(d * (d + 2.0));
        }
    }
    return theta;
}

double mapping_derivative(double beta, const BoundSpec& spec) {
    switch (spec.kind) {
        case BoundKind::Fixed:
            return 1.0;
        case BoundKind::TwoSided:
            return 0.5 * (spec.hi - spec.lo) * kHalfPi * std::cos(kHalfPi * reduce_period(beta));
        case BoundKind::LowerOnly:
            return beta / std::sqrt(beta * beta + 1.0);
        case BoundKind::UpperOnly:
            return -beta / std::sqrt(beta * beta + 1.0);
    }
    return 1.0;
}

Eigen::VectorXd forward(const Eigen::VectorXd& beta, std::span<const BoundSpec> specs) {
    Eigen::VectorXd theta(beta.size());
    for (Eigen::Index i = 0; i < beta.size(); ++i) theta[i] = forward(beta[i], specs[i]);
    return theta;
}

Eigen::VectorXd inverse(const Eigen::VectorXd& theta, std::span<const BoundSpec> specs) {
    Eigen::VectorXd beta(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const BoundSpec& s = specs[i];
        if (!std::isfinite(theta[i]) || !s.contains(theta[i])) {
            throw OutOfBounds(static_cast<std::size_t>(i),
                              "value " + std::to_string(theta[i]) + " violates bound " +
                                  s.describe());
        }
        beta[i] = inverse(theta[i], s);
    }
    return beta;
}

Eigen::VectorXd mapping_jacobian(const Eigen::VectorXd& beta, std::span<const BoundSpec> specs) {
    Eigen::VectorXd j(beta.size());
    for (Eigen::Index i = 0; i < beta.size(); ++i) j[i] = mapping_derivative(beta[i], specs[i]);
    return j;
}

Eigen::MatrixXd beta_sensitivity(const Eigen::MatrixXd& s_theta, const Eigen::VectorXd& j_map) {
    if (s_theta.cols() != j_map.size()) {
        throw Error("beta_sensitivity: column count does not match mapping Jacobian");
    }
    return s_theta * j_map.asDiagonal();
}

int nudge_stationary(Eigen::VectorXd& beta, std::span<const BoundSpec> specs, double tolerance,
                     double offset) {
    int moved = 0;
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
        const BoundSpec& s = specs[i];
        double& b = beta[i];
        if (s.kind == BoundKind::TwoSided) {
            // Odd integers are the extrema of sin(pi*beta/2).
            const double nearest_odd = 2.0 * std::round((b - 1.0) / 2.0) + 1.0;
            if (std::abs(b - nearest_odd) <= tolerance) {
                b = nearest_odd - std::copysign(offset, nearest_odd);
                ++moved;
            }
        } else if (s.kind != BoundKind::Fixed && std::abs(b) <= tolerance) {
            b = offset;
            ++moved;
        }
    }
    return moved;
}

}  // namespace dgparam

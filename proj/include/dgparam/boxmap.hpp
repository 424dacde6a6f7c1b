#pragma once

// Smooth invertible maps between bounded parameters theta and unbounded
// search variables beta:
//   two-sided  [lo, hi]  theta = (hi - lo)/2 * sin(pi*beta/2) + (hi + lo)/2
//   lower only [lo, inf) theta = lo - 1 + sqrt(beta^2 + 1)
//   upper only (-inf, hi] theta = hi + 1 - sqrt(beta^2 + 1)

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dgparam {

enum class BoundKind {
    Fixed,
    TwoSided,    // lo <= theta <= hi
    LowerOnly,   // lo <= theta
    UpperOnly,   // theta <= hi
};

struct BoundSpec {
    BoundKind kind = BoundKind::Fixed;
    double lo = 0.0;
    double hi = 0.0;

    static BoundSpec fixed() { return {BoundKind::Fixed, 0.0, 0.0}; }
    static BoundSpec two_sided(double lo, double hi) { return {BoundKind::TwoSided, lo, hi}; }
    static BoundSpec lower(double lo) { return {BoundKind::LowerOnly, lo, 0.0}; }
    static BoundSpec upper(double hi) { return {BoundKind::UpperOnly, 0.0, hi}; }

    /// Builds the bound implied by a [lo, hi] pair where either side may be infinite.
    static BoundSpec from_limits(double lo, double hi);

    bool is_free() const { return kind != BoundKind::Fixed; }
    bool contains(double theta) const;
    double lower_limit() const;
    double upper_limit() const;
    std::string describe() const;
};

/// Throws BadBounds if a two-sided spec has lo >= hi or a limit is not finite.
void validate_bounds(std::span<const BoundSpec> specs);

double forward(double beta, const BoundSpec& spec);
/// Principal-branch inverse; OutOfBounds (index 0) if theta violates the bound.
double inverse(double theta, const BoundSpec& spec);
double mapping_derivative(double beta, const BoundSpec& spec);

/// Element-wise maps over the free parameters; specs must all be free.
Eigen::VectorXd forward(const Eigen::VectorXd& beta, std::span<const BoundSpec> specs);

/// Throws OutOfBounds naming the first entry that violates its bound.
Eigen::VectorXd inverse(const Eigen::VectorXd& theta, std::span<const BoundSpec> specs);

/// Diagonal of dtheta/dbeta.
Eigen::VectorXd mapping_jacobian(const Eigen::VectorXd& beta, std::span<const BoundSpec> specs);

/// Chain rule dy/dbeta = dy/dtheta * diag(dtheta/dbeta).
Eigen::MatrixXd beta_sensitivity(const Eigen::MatrixXd& s_theta, const Eigen::VectorXd& j_map);

/// Moves beta off points where the mapping derivative vanishes (two-sided
/// entries at odd integers, one-sided entries at zero). Returns the number
/// of entries moved.
int nudge_stationary(Eigen::VectorXd& beta, std::span<const BoundSpec> specs,
                     double tolerance = 1e-9, double offset = 1e-6);

}  // namespace dgparam

#pragma once

#include <limits>
#include <optional>
#include <variant>

#include "mrules/linalg.hpp"

namespace mrules {

inline constexpr double kLpTolerance = 1e-9;
inline constexpr double kRankTolerance = 1e-10;

/// maximize objective·x
/// subject to eq·x = eq_rhs, ge·x ≥ ge_rhs, lower ≤ x ≤ upper.
/// Empty `lower` means x ≥ 0; empty `upper` means no upper bounds.
/// Bounds may be infinite.
struct LpProblem {
  Vector objective;
  Matrix eq;
  Vector eq_rhs;
  Matrix ge;
  Vector ge_rhs;
  Vector lower;
  Vector upper;

  std::size_t variables() const { return objective.size(); }
};

struct LpOptimal {
  Vector x;
  double value = 0.0;
};
struct LpInfeasible {};
struct LpUnbounded {};

using LpOutcome = std::variant<LpOptimal, LpInfeasible, LpUnbounded>;

/// Two-phase dense tableau simplex with Bland's rule. An Optimal result is a
/// basic solution and is re-verified against every constraint to within
/// kLpTolerance (scaled by the row magnitude); failures throw
/// NumericalBreakdown.
LpOutcome solve_lp(const LpProblem& problem);

/// Phase-1 only: some point satisfying the system, or nullopt.
std::optional<Vector> feasible_point(const Matrix& eq, const Vector& eq_rhs,
                                     const Matrix& ge, const Vector& ge_rhs,
                                     const Vector& lower, const Vector& upper);

/// Minimum-‖x‖₁ point of {eq·x = eq_rhs, ge·x ≥ ge_rhs, ‖x‖_∞ ≤ bound} over
/// free x ∈ ℝⁿ, or nullopt when the system is infeasible. Empty blocks may be
/// default-constructed.
std::optional<Vector> min_l1_point(const Matrix& eq, const Vector& eq_rhs,
                                   const Matrix& ge, const Vector& ge_rhs,
                                   std::size_t n,
                                   double bound = std::numeric_limits<double>::infinity());

/// Pivots at least tolerance·max|aᵢⱼ| under Gaussian elimination with partial
/// pivoting.
std::size_t rank(const Matrix& a, double tolerance = kRankTolerance);

/// A nonzero x with a·x = 0 and ‖x‖₁ = 1, or nullopt when the columns of
/// `a` are independent. Deterministic.
std::optional<Vector> null_vector(const Matrix& a,
                                  double tolerance = kRankTolerance);

/// Maximum residual of `x` against the constraints of `problem`, each row
/// scaled by 1 + |rhs| + Σ|aᵢⱼxⱼ|.
double lp_residual(const LpProblem& problem, const Vector& x);

}  // namespace mrules

#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mrules/differentiation.hpp"
#include "mrules/error.hpp"
#include "mrules/linalg.hpp"
#include "mrules/problem.hpp"

namespace mrules {

/// For each equality j, a direction u_j that moves the objective and every
/// active inequality up by at least r while moving h_j by +r and the other
/// equalities not at all; ũ_j does the same with −r. The slacks record
/// z = b − D·u ≤ 0 with b = (r, …, r).
struct DirectionPairs {
  double radius = 1.0;
  std::vector<Vector> forward;
  std::vector<Vector> backward;
  std::vector<Vector> forward_slack;
  std::vector<Vector> backward_slack;

  std::size_t equalities() const { return forward.size(); }
  /// max over the convex hull of the pairs of ‖k‖_∞, attained at a vertex.
  double max_norm() const;
};

/// Convex coefficients (a_j, ã_j) over the direction pairs.
struct SimplexState {
  Vector forward;
  Vector backward;

  static SimplexState barycenter(std::size_t q);
  /// k = Σ a_j u_j + Σ ã_j ũ_j
  Vector point(const DirectionPairs& pairs) const;
};

/// Everything the constructive non-optimality argument needs once the
/// multiplier LP has shown that the linearized cone is all of ℝ^{1+s+q}.
struct NoMultipliers {
  /// Indices (0-based) of the active inequalities.
  std::vector<std::size_t> active;
  /// Rows: gradient of the objective, then of each active inequality.
  Matrix objective_and_active;
  /// Rows: gradient of each equality. Empty for inequality problems.
  Matrix equality_jacobian;
  /// Inequality problems: u with ⟨row, u⟩ ≥ 1 for every row above.
  std::optional<Vector> direction;
  /// Mixed problems.
  std::optional<DirectionPairs> pairs;
};

/// Minimum-‖·‖₁ u with ⟨row_i, u⟩ ≥ 1 for every row, ‖u‖_∞ ≤ bound.
/// Throws InternalInconsistency when no such u exists.
Vector improving_direction_inequality(
    const Matrix& rows, double bound = std::numeric_limits<double>::infinity());

/// Solves the 2q systems D_G·u ≥ b, D_H·u = ±r·e_j (minimum ‖u‖₁ each).
/// Rows of `objective_and_active` are scaled to unit ∞-norm first.
/// Throws InternalInconsistency when any system is infeasible.
DirectionPairs direction_pairs(const Matrix& objective_and_active,
                               const Matrix& equality_jacobian,
                               double radius = 1.0);

/// w_j(k) = h_j(x̂ + αk)/α − ⟨∇h_j(x̂), k⟩. Throws StepLeavesDomain.
Vector residual_w(std::span<const ScalarField> equalities,
                  std::span<const double> x, double alpha,
                  std::span<const double> k, const Matrix& equality_jacobian,
                  const DomainBox* domain = nullptr);

/// a_j = 1/(2q) − w_j/(2r), ã_j = 1/(2q) + w_j/(2r), renormalized to sum 1.
/// Throws ResidualTooLarge when ‖w‖_∞ ≥ r/q.
SimplexState phi_map(const SimplexState& state, std::span<const double> w,
                     const DirectionPairs& pairs);

struct FixedPointConfig {
  double tolerance = 1e-10;
  int max_iterations = 500;
  double damping = 0.5;
};

struct FixedPointResult {
  Vector k;
  SimplexState state;
  int iterations = 0;
  Vector residual_history;
  /// True when damped iteration failed and coordinate bisection finished.
  bool used_fallback = false;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, Vector residual_history)
      : NumericalError(what), history_(std::move(residual_history)) {}
  const Vector& residual_history() const { return history_; }

 private:
  Vector history_;
};

/// The equality data the fixed-point map is built from.
struct EqualityContext {
  std::span<const ScalarField> equalities;
  std::span<const double> point;
  const Matrix& jacobian;
  const DomainBox* domain = nullptr;
};

/// Damped iteration k ← (1−θ)k + θΦ(k) from the barycenter, stopping when
/// ‖Φ(k) − k‖_∞ ≤ tolerance. Falls back to coordinate bisection on the
/// pair coefficients when the damped residual stops decreasing. Throws
/// NonConvergence or ResidualTooLarge (caller shrinks α).
FixedPointResult schauder_fixed_point(const EqualityContext& ctx,
                                      const DirectionPairs& pairs,
                                      double alpha,
                                      const FixedPointConfig& cfg,
                                      bool allow_fallback = true);

struct AscentConfig {
  double restore_tolerance = 1e-8;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  /// Fraction of the distance to the domain boundary usable as r₀.
  double domain_margin = 0.9;
  FixedPointConfig fixed_point;
};

struct AscentCertificate {
  Vector improved_point;
  double alpha = 0.0;
  double objective_gain = 0.0;
  Vector inequality_values;
  Vector equality_values;
  double max_equality_residual = 0.0;
  /// Inequality problems.
  std::optional<Vector> direction;
  /// Mixed problems.
  std::optional<Vector> fixed_point;
  int fixed_point_iterations = 0;
  int backtracks = 0;
  bool used_fallback = false;
};

/// Backtracks over the step until the produced point strictly improves the
/// objective, keeps every inequality strictly positive, stays in the domain
/// and (mixed case) restores the equalities to `restore_tolerance`.
/// Throws CertificationFailed when the backtracking budget is exhausted.
AscentCertificate certify_nonoptimal(const ProblemView& problem,
                                     const Candidate& candidate,
                                     const NoMultipliers& data,
                                     const AscentConfig& cfg);

}  // namespace mrules

#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mrules/ascent.hpp"
#include "mrules/differentiation.hpp"
#include "mrules/linalg.hpp"
#include "mrules/problem.hpp"

namespace mrules {

inline constexpr double kDefaultStationarityTolerance = 1e-7;

struct EngineConfig {
  double stationarity_tolerance = kDefaultStationarityTolerance;
  /// Overrides the candidate's own activity tolerance when set.
  std::optional<double> activity_tolerance;
  /// Report inequalities whose value lies in (τ_act, 10·τ_act].
  bool warn_near_active = true;
  double direction_bound = std::numeric_limits<double>::infinity();
  DiffConfig diff;
  AscentConfig ascent;
};

struct ActiveSet {
  /// 0-based indices of the inequalities with |g_i(x̂)| ≤ τ_act.
  std::vector<std::size_t> indices;
  Vector inequality_values;
  Vector equality_values;
  std::vector<std::size_t> near_active;
  double tolerance = kDefaultActivityTolerance;

  bool contains(std::size_t i) const;
};

/// Throws InfeasibleCandidate.
ActiveSet active_set(const ProblemView& problem, const Candidate& candidate,
                     std::optional<double> tolerance_override = std::nullopt);

/// Nonzero v with v·(M·u + z) ≤ 0 for every u and every z ≤ 0 on the
/// recession coordinates (z = 0 elsewhere): Mᵀv = 0 and v ≥ 0 on the
/// recession coordinates, ‖v‖₁ = 1. Among such v the first recession
/// coordinate is maximized. nullopt means the cone is all of ℝᵏ and no
/// hyperplane is needed.
std::optional<Vector> supporting_hyperplane(
    const Matrix& generators, const std::vector<bool>& recession);

enum class Normalization { kUnitL1, kLeadingOne };

std::string_view to_string(Normalization n);

struct MultiplierCertificate {
  Vector point;
  /// λ₀ (objective) followed by one entry per inequality.
  Vector lambda;
  /// One entry per equality; empty for inequality problems.
  Vector mu;
  Normalization normalization = Normalization::kUnitL1;
  double stationarity_residual = 0.0;
  /// λ_i·g_i(x̂), one per inequality.
  Vector complementary_slackness;
  std::vector<std::size_t> active;
  std::vector<std::string> notes;
};

using MultiplierResult = std::variant<MultiplierCertificate, NoMultipliers>;

/// Gradients of the objective, each inequality in `active`, and each equality.
struct Linearization {
  Matrix objective_and_active;
  Matrix equality_jacobian;
};

Linearization linearize(const ProblemView& problem, std::span<const double> x,
                        std::span<const std::size_t> active,
                        const DiffConfig& cfg);

/// Σ λ_i·rows_i + Σ μ_j·jac_j, ∞-norm.
double stationarity_residual(const Matrix& objective_and_active,
                             std::span<const double> lambda_active,
                             const Matrix& equality_jacobian,
                             std::span<const double> mu);

MultiplierResult fritz_john_inequality(const InequalityProblem& problem,
                                       const Candidate& candidate,
                                       const EngineConfig& cfg);

MultiplierResult fritz_john_mixed(const MixedProblem& problem,
                                  const Candidate& candidate,
                                  const EngineConfig& cfg);

/// Dispatches on the problem kind.
MultiplierResult fritz_john(const Problem& problem, const Candidate& candidate,
                            const EngineConfig& cfg);

/// w with rows·w ≥ 1 (minimum ‖w‖₁); the zero vector when there are no rows.
std::optional<Vector> cq_positive_direction(const Matrix& active_rows,
                                            std::size_t dimension);

/// rank(H) = number of rows.
bool cq_linear_independence(const Matrix& equality_jacobian);

/// w with H·w = 0 and rows·w ≥ 1 (minimum ‖w‖₁); the zero vector when there
/// are no active rows.
std::optional<Vector> cq_kernel_direction(const Matrix& active_rows,
                                          const Matrix& equality_jacobian,
                                          std::size_t dimension);

struct CqReport {
  std::optional<Vector> positive_direction;
  bool positive_direction_holds = false;
  std::size_t equality_rank = 0;
  std::size_t equality_count = 0;
  bool independent = true;
  std::optional<Vector> kernel_direction;
  bool kernel_direction_holds = false;
  bool mixed = false;

  /// The hypotheses under which λ₀ can be taken as 1.
  bool guarantees_kkt() const;
};

CqReport constraint_qualifications(const Matrix& active_rows,
                                   const Matrix& equality_jacobian,
                                   std::size_t dimension, bool mixed);

/// Divides every multiplier by λ₀. Throws ZeroLeadingMultiplier when
/// λ₀ ≤ tolerance.
MultiplierCertificate normalize_kkt(const MultiplierCertificate& cert,
                                    double tolerance =
                                        kDefaultStationarityTolerance);

}  // namespace mrules

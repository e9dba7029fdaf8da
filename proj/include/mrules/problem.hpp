#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mrules/builtins.hpp"
#include "mrules/expr.hpp"
#include "mrules/linalg.hpp"

namespace mrules {

/// A real-valued function of an n-vector: a parsed expression or a builtin.
class ScalarField {
 public:
  ScalarField(Expression expr, std::string source);
  ScalarField(const Builtin& builtin, std::size_t arity);

  /// Parses `source`, accepting the "builtin:<name>" scheme.
  static ScalarField parse(std::string_view source,
                           const std::vector<std::string>& variables);

  double operator()(std::span<const double> x) const { return evaluate(x); }
  double evaluate(std::span<const double> x) const;

  std::size_t arity() const { return arity_; }
  /// Text as it appears in a problem file.
  const std::string& source() const { return source_; }
  const Builtin* builtin() const { return builtin_; }
  const Expression* expression() const {
    return expr_ ? &*expr_ : nullptr;
  }

  friend bool operator==(const ScalarField& a, const ScalarField& b);

 private:
  std::optional<Expression> expr_;
  const Builtin* builtin_ = nullptr;
  std::size_t arity_ = 0;
  std::string source_;
};

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Open box standing in for the open set the problem lives on.
class DomainBox {
 public:
  DomainBox() = default;
  explicit DomainBox(std::vector<Interval> intervals);
  static DomainBox unbounded(std::size_t n);

  std::size_t dimension() const { return intervals_.size(); }
  const std::vector<Interval>& intervals() const { return intervals_; }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }

  /// Strict containment.
  bool contains(std::span<const double> x) const;
  /// Largest r with the closed ∞-ball B̄(x, r) inside the box closure;
  /// +inf for an unbounded box.
  double distance_to_boundary(std::span<const double> x) const;

  friend bool operator==(const DomainBox&, const DomainBox&) = default;

 private:
  std::vector<Interval> intervals_;
};

/// Maximize objective subject to constraints[i](x) ≥ 0.
struct InequalityProblem {
  std::vector<std::string> variables;
  ScalarField objective;
  std::vector<ScalarField> constraints;
  DomainBox domain;

  std::size_t dimension() const { return variables.size(); }
  friend bool operator==(const InequalityProblem&,
                         const InequalityProblem&) = default;
};

/// Maximize objective subject to inequalities ≥ 0 and equalities = 0.
struct MixedProblem {
  std::vector<std::string> variables;
  ScalarField objective;
  std::vector<ScalarField> inequalities;
  std::vector<ScalarField> equalities;
  DomainBox domain;

  std::size_t dimension() const { return variables.size(); }
  friend bool operator==(const MixedProblem&, const MixedProblem&) = default;
};

using Problem = std::variant<InequalityProblem, MixedProblem>;

inline constexpr double kDefaultActivityTolerance = 1e-9;

struct Candidate {
  Vector point;
  double activity_tolerance = kDefaultActivityTolerance;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Uniform read-only access to either problem kind. Views the problem it was
/// built from; must not outlive it.
struct ProblemView {
  const std::vector<std::string>& variables;
  const ScalarField& objective;
  std::span<const ScalarField> inequalities;
  std::span<const ScalarField> equalities;
  const DomainBox& domain;
  bool mixed;

  std::size_t dimension() const { return variables.size(); }
};

ProblemView view(const InequalityProblem& p);
ProblemView view(const MixedProblem& p);
ProblemView view(const Problem& p);

/// Throws DimensionMismatch or PointOutsideDomain.
void validate(const ProblemView& p, const Candidate& c);

struct FeasibilityReport {
  Vector inequality_values;
  Vector equality_values;
  bool in_domain = false;
  bool feasible = false;
};

FeasibilityReport feasibility_report(const ProblemView& p,
                                     std::span<const double> point,
                                     double tolerance);

struct LoadedProblem {
  Problem problem;
  Candidate candidate;
  friend bool operator==(const LoadedProblem&, const LoadedProblem&) = default;
};

/// Problem-file reader/writer. See README for the format.
LoadedProblem parse_problem(std::string_view text);
LoadedProblem load_problem(const std::filesystem::path& path);
std::string format_problem(const Problem& problem, const Candidate& candidate);

/// Sidecar describing the outcome a corpus problem should produce.
/// Multipliers are in KKT form (λ₀ = 1) for KKT verdicts and in ‖·‖₁ form
/// otherwise.
struct Expectation {
  std::string verdict;
  std::optional<Vector> lambda;
  std::optional<Vector> mu;
  double tolerance = 1e-6;
};

Expectation parse_expectation(std::string_view text);

}  // namespace mrules

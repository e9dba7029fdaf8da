#include "mrules/problem.hpp"

#include <cmath>

#include "mrules/error.hpp"

namespace mrules {

namespace {
constexpr std::string_view kBuiltinScheme = "builtin:";
}

ScalarField::ScalarField(Expression expr, std::string source)
    : expr_(std::move(expr)), source_(std::move(source)) {
  arity_ = expr_->variables().size();
}

ScalarField::ScalarField(const Builtin& builtin, std::size_t arity)
    : builtin_(&builtin),
      arity_(arity),
      source_(std::string(kBuiltinScheme) + std::string(builtin.name)) {
  if (builtin.arity != 0 && builtin.arity != arity)
    throw DimensionMismatch("builtin:" + std::string(builtin.name) +
                            " needs dimension " +
                            std::to_string(builtin.arity));
}

ScalarField ScalarField::parse(std::string_view source,
                               const std::vector<std::string>& variables) {
  if (source.starts_with(kBuiltinScheme)) {
    std::string name(source.substr(kBuiltinScheme.size()));
    const Builtin* b = find_builtin(name);
    if (b == nullptr) throw UnknownFunction("builtin:" + name);
    return ScalarField(*b, variables.size());
  }
  return ScalarField(mrules::parse(source, variables), std::string(source));
}

double ScalarField::evaluate(std::span<const double> x) const {
  if (x.size() != arity_)
    throw DimensionMismatch("field '" + source_ + "' expects dimension " +
                            std::to_string(arity_));
  return builtin_ ? builtin_->evaluate(x) : expr_->evaluate(x);
}

bool operator==(const ScalarField& a, const ScalarField& b) {
  if (a.arity_ != b.arity_ || a.builtin_ != b.builtin_) return false;
  if (a.expr_.has_value() != b.expr_.has_value()) return false;
  return !a.expr_ || *a.expr_ == *b.expr_;
}

DomainBox::DomainBox(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (std::isnan(iv.lower) || std::isnan(iv.upper) || !(iv.lower < iv.upper))
      throw InputError("domain interval " + std::to_string(i + 1) +
                       " is empty");
  }
}

DomainBox DomainBox::unbounded(std::size_t n) {
  return DomainBox(std::vector<Interval>(n));
}

bool DomainBox::contains(std::span<const double> x) const {
  if (x.size() != intervals_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > intervals_[i].lower && x[i] < intervals_[i].upper))
      return false;
  return true;
}

double DomainBox::distance_to_boundary(std::span<const double> x) const {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    r = std::min(r, x[i] - intervals_[i].lower);
    r = std::min(r, intervals_[i].upper - x[i]);
  }
  return r;
}

ProblemView view(const InequalityProblem& p) {
  return {p.variables, p.objective, p.constraints, {}, p.domain, false};
}

ProblemView view(const MixedProblem& p) {
  return {p.variables, p.objective, p.inequalities, p.equalities, p.domain,
          true};
}

ProblemView view(const Problem& p) {
  return std::visit([](const auto& q) { return view(q); }, p);
}

void validate(const ProblemView& p, const Candidate& c) {
  const std::size_t n = p.dimension();
  auto check = [&](const ScalarField& f) {
    if (f.arity() != n)
      throw DimensionMismatch("field '" + f.source() + "' has arity " +
                              std::to_string(f.arity()) + ", problem has " +
                              std::to_string(n));
  };
  check(p.objective);
  for (const auto& g : p.inequalities) check(g);
  for (const auto& h : p.equalities) check(h);
  if (p.domain.dimension() != n)
    throw DimensionMismatch("domain has " +
                            std::to_string(p.domain.dimension()) +
                            " intervals for " + std::to_string(n) +
                            " variables");
  if (c.point.size() != n)
    throw DimensionMismatch("point has " + std::to_string(c.point.size()) +
                            " entries for " + std::to_string(n) +
                            " variables");
  if (!(c.activity_tolerance > 0.0))
    throw InputError("activity tolerance must be positive");
  if (!p.domain.contains(c.point))
    throw PointOutsideDomain("candidate point is not inside the domain box");
}

FeasibilityReport feasibility_report(const ProblemView& p,
                                     std::span<const double> point,
                                     double tolerance) {
  if (point.size() != p.dimension())
    throw DimensionMismatch("point dimension does not match problem");
  FeasibilityReport r;
  r.in_domain = p.domain.contains(point);
  r.feasible = r.in_domain;
  for (const auto& g : p.inequalities) {
    const double v = g(point);
    r.inequality_values.push_back(v);
    if (v < -tolerance) r.feasible = false;
  }
  for (const auto& h : p.equalities) {
    const double v = h(point);
    r.equality_values.push_back(v);
    if (std::abs(v) > tolerance) r.feasible = false;
  }
  return r;
}

}  // namespace mrules

#include "mrules/multipliers.hpp"

#include <cmath>
#include <sstream>

#include "mrules/lp.hpp"

namespace mrules {

bool ActiveSet::contains(std::size_t i) const {
  return std::find(indices.begin(), indices.end(), i) != indices.end();
}

ActiveSet active_set(const ProblemView& problem, const Candidate& candidate,
                     std::optional<double> tolerance_override) {
  validate(problem, candidate);
  ActiveSet s;
  s.tolerance = tolerance_override.value_or(candidate.activity_tolerance);
  if (!(s.tolerance > 0.0))
    throw InputError("activity tolerance must be positive");
  const auto& x = candidate.point;
  for (std::size_t i = 0; i < problem.inequalities.size(); ++i) {
    const double g = problem.inequalities[i](x);
    s.inequality_values.push_back(g);
    if (g < -s.tolerance) {
      std::ostringstream m;
      m << "inequality " << i + 1 << " is violated: value " << g;
      throw InfeasibleCandidate(m.str());
    }
    if (std::abs(g) <= s.tolerance)
      s.indices.push_back(i);
    else if (g <= 10.0 * s.tolerance)
      s.near_active.push_back(i);
  }
  for (std::size_t j = 0; j < problem.equalities.size(); ++j) {
    const double h = problem.equalities[j](x);
    s.equality_values.push_back(h);
    if (std::abs(h) > s.tolerance) {
      std::ostringstream m;
      m << "equality " << j + 1 << " is violated: value " << h;
      throw InfeasibleCandidate(m.str());
    }
  }
  return s;
}

std::optional<Vector> supporting_hyperplane(const Matrix& generators,
                                            const std::vector<bool>& recession) {
  const std::size_t k = generators.rows();
  const std::size_t n = generators.cols();
  if (recession.size() != k)
    throw DimensionMismatch("recession mask does not match the generator rows");
  std::vector<std::size_t> rec, free_rows;
  for (std::size_t i = 0; i < k; ++i)
    (recession[i] ? rec : free_rows).push_back(i);
  if (rec.empty())
    throw InputError("supporting hyperplane needs a recession coordinate");
  for (std::size_t i = 0; i < k; ++i)
    for (double a : generators.row(i))
      if (!std::isfinite(a))
        throw NumericalBreakdown("non-finite gradient entry");

  // Mᵀv = 0 with Σ_rec v = 1, v ≥ 0 on the recession block.
  LpProblem lp;
  lp.objective = Vector(k, 0.0);
  lp.objective[rec.front()] = 1.0;
  lp.eq = Matrix(n + 1, k);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < k; ++i) lp.eq(j, i) = generators(i, j);
  for (std::size_t i : rec) lp.eq(n, i) = 1.0;
  lp.eq_rhs = Vector(n + 1, 0.0);
  lp.eq_rhs[n] = 1.0;
  lp.ge = Matrix(0, k);
  lp.lower = Vector(k, 0.0);
  for (std::size_t i : free_rows)
    lp.lower[i] = -std::numeric_limits<double>::infinity();

  auto outcome = solve_lp(lp);
  if (const auto* opt = std::get_if<LpOptimal>(&outcome)) {
    Vector v = opt->x;
    const double len = norm_1(v);
    for (double& a : v) a /= len;
    for (std::size_t i : rec) v[i] = std::max(v[i], 0.0);
    return v;
  }
  if (free_rows.empty()) return std::nullopt;

  // Every valid v vanishes on the recession block: look for a dependency
  // among the free rows alone.
  Matrix ft(n, free_rows.size());
  for (std::size_t c = 0; c < free_rows.size(); ++c)
    for (std::size_t j = 0; j < n; ++j) ft(j, c) = generators(free_rows[c], j);
  auto mu = null_vector(ft);
  if (!mu) return std::nullopt;
  Vector v(k, 0.0);
  for (std::size_t c = 0; c < free_rows.size(); ++c) v[free_rows[c]] = (*mu)[c];
  return v;
}

std::string_view to_string(Normalization n) {
  switch (n) {
    case Normalization::kUnitL1: return "unit_l1";
    case Normalization::kLeadingOne: return "lambda0_one";
  }
  return "?";
}

Linearization linearize(const ProblemView& problem, std::span<const double> x,
                        std::span<const std::size_t> active,
                        const DiffConfig& cfg) {
  const std::size_t n = problem.dimension();
  const DomainBox* box = &problem.domain;
  Linearization lin;
  lin.objective_and_active = Matrix(0, n);
  lin.equality_jacobian = Matrix(0, n);
  lin.objective_and_active.append_row(
      gateaux_gradient(problem.objective, x, cfg, box));
  for (std::size_t i : active)
    lin.objective_and_active.append_row(
        gateaux_gradient(problem.inequalities[i], x, cfg, box));
  for (const auto& h : problem.equalities)
    lin.equality_jacobian.append_row(gateaux_gradient(h, x, cfg, box));
  return lin;
}

double stationarity_residual(const Matrix& objective_and_active,
                             std::span<const double> lambda_active,
                             const Matrix& equality_jacobian,
                             std::span<const double> mu) {
  Vector sum = multiply_transposed(objective_and_active, lambda_active);
  if (!equality_jacobian.empty()) {
    const Vector eq = multiply_transposed(equality_jacobian, mu);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += eq[j];
  }
  return norm_inf(sum);
}

namespace {

const char* const kSemicontinuityNote =
    "inactive inequalities are excluded; their lower semicontinuity is not "
    "certified";

MultiplierResult solve_multipliers(const ProblemView& problem,
                                   const Candidate& candidate,
                                   const EngineConfig& cfg) {
  cfg.diff.validate();
  const ActiveSet act = active_set(problem, candidate, cfg.activity_tolerance);
  const Vector& x = candidate.point;
  const Linearization lin = linearize(problem, x, act.indices, cfg.diff);
  const std::size_t p = lin.objective_and_active.rows();
  const std::size_t q = lin.equality_jacobian.rows();

  Matrix generators = lin.objective_and_active;
  for (std::size_t j = 0; j < q; ++j)
    generators.append_row(lin.equality_jacobian.row(j));
  std::vector<bool> recession(p + q, false);
  std::fill(recession.begin(), recession.begin() + p, true);

  auto v = supporting_hyperplane(generators, recession);
  if (!v) {
    NoMultipliers none;
    none.active = act.indices;
    none.objective_and_active = lin.objective_and_active;
    none.equality_jacobian = lin.equality_jacobian;
    if (problem.mixed && q > 0)
      none.pairs = direction_pairs(lin.objective_and_active,
                                   lin.equality_jacobian, 1.0);
    else
      none.direction = improving_direction_inequality(lin.objective_and_active,
                                                      cfg.direction_bound);
    return none;
  }

  MultiplierCertificate cert;
  cert.point = x;
  cert.active = act.indices;
  cert.lambda = Vector(1 + problem.inequalities.size(), 0.0);
  cert.lambda[0] = (*v)[0];
  for (std::size_t a = 0; a < act.indices.size(); ++a)
    cert.lambda[1 + act.indices[a]] = (*v)[1 + a];
  cert.mu.assign(v->begin() + static_cast<std::ptrdiff_t>(p), v->end());
  const std::span<const double> lam_active(v->data(), p);
  cert.stationarity_residual = stationarity_residual(
      lin.objective_and_active, lam_active, lin.equality_jacobian, cert.mu);
  for (std::size_t i = 0; i < problem.inequalities.size(); ++i)
    cert.complementary_slackness.push_back(
        cert.lambda[1 + i] == 0.0 ? 0.0
                                  : cert.lambda[1 + i] * act.inequality_values[i]);

  if (cert.stationarity_residual > cfg.stationarity_tolerance) {
    std::ostringstream m;
    m << "stationarity residual " << cert.stationarity_residual
      << " exceeds tolerance " << cfg.stationarity_tolerance;
    throw NumericalBreakdown(m.str());
  }
  if (act.indices.size() < problem.inequalities.size())
    cert.notes.emplace_back(kSemicontinuityNote);
  if (cfg.warn_near_active)
    for (std::size_t i : act.near_active) {
      std::ostringstream m;
      m << "inequality " << i + 1 << " is near-active (value "
        << act.inequality_values[i] << ") and treated as inactive";
      cert.notes.push_back(m.str());
    }
  return cert;
}

}  // namespace

MultiplierResult fritz_john_inequality(const InequalityProblem& problem,
                                       const Candidate& candidate,
                                       const EngineConfig& cfg) {
  return solve_multipliers(view(problem), candidate, cfg);
}

MultiplierResult fritz_john_mixed(const MixedProblem& problem,
                                  const Candidate& candidate,
                                  const EngineConfig& cfg) {
  return solve_multipliers(view(problem), candidate, cfg);
}

MultiplierResult fritz_john(const Problem& problem, const Candidate& candidate,
                            const EngineConfig& cfg) {
  return solve_multipliers(view(problem), candidate, cfg);
}

std::optional<Vector> cq_positive_direction(const Matrix& active_rows,
                                            std::size_t dimension) {
  if (active_rows.empty()) return Vector(dimension, 0.0);
  return min_l1_point(Matrix(0, dimension), {}, active_rows,
                      Vector(active_rows.rows(), 1.0), dimension);
}

bool cq_linear_independence(const Matrix& equality_jacobian) {
  if (equality_jacobian.empty()) return true;
  if (equality_jacobian.rows() > equality_jacobian.cols()) return false;
  return rank(equality_jacobian) == equality_jacobian.rows();
}

std::optional<Vector> cq_kernel_direction(const Matrix& active_rows,
                                          const Matrix& equality_jacobian,
                                          std::size_t dimension) {
  if (active_rows.empty()) return Vector(dimension, 0.0);
  const Matrix eq =
      equality_jacobian.empty() ? Matrix(0, dimension) : equality_jacobian;
  return min_l1_point(eq, Vector(eq.rows(), 0.0), active_rows,
                      Vector(active_rows.rows(), 1.0), dimension);
}

bool CqReport::guarantees_kkt() const {
  return mixed ? independent && kernel_direction_holds
               : positive_direction_holds;
}

CqReport constraint_qualifications(const Matrix& active_rows,
                                   const Matrix& equality_jacobian,
                                   std::size_t dimension, bool mixed) {
  CqReport r;
  r.mixed = mixed;
  r.positive_direction = cq_positive_direction(active_rows, dimension);
  r.positive_direction_holds = r.positive_direction.has_value();
  r.equality_count = equality_jacobian.rows();
  r.equality_rank = equality_jacobian.empty() ? 0 : rank(equality_jacobian);
  r.independent = cq_linear_independence(equality_jacobian);
  if (mixed) {
    r.kernel_direction =
        cq_kernel_direction(active_rows, equality_jacobian, dimension);
    r.kernel_direction_holds = r.kernel_direction.has_value();
  }
  return r;
}

MultiplierCertificate normalize_kkt(const MultiplierCertificate& cert,
                                    double tolerance) {
  if (cert.lambda.empty() || !(cert.lambda[0] > tolerance)) {
    std::ostringstream m;
    m << "leading multiplier " << (cert.lambda.empty() ? 0.0 : cert.lambda[0])
      << " is not above " << tolerance << "; no KKT form";
    throw ZeroLeadingMultiplier(m.str());
  }
  const double l0 = cert.lambda[0];
  MultiplierCertificate out = cert;
  for (double& l : out.lambda) l /= l0;
  for (double& m : out.mu) m /= l0;
  for (double& c : out.complementary_slackness) c /= l0;
  out.lambda[0] = 1.0;
  out.stationarity_residual /= l0;
  out.normalization = Normalization::kLeadingOne;
  return out;
}

}  // namespace mrules

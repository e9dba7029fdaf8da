#include "mrules/ascent.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mrules/lp.hpp"

namespace mrules {

double DirectionPairs::max_norm() const {
  double m = 0.0;
  for (const auto& u : forward) m = std::max(m, norm_inf(u));
  for (const auto& u : backward) m = std::max(m, norm_inf(u));
  return m;
}

SimplexState SimplexState::barycenter(std::size_t q) {
  const double c = 1.0 / (2.0 * static_cast<double>(q));
  return {Vector(q, c), Vector(q, c)};
}

Vector SimplexState::point(const DirectionPairs& pairs) const {
  const std::size_t n =
      pairs.forward.empty() ? 0 : pairs.forward.front().size();
  Vector k(n, 0.0);
  for (std::size_t j = 0; j < pairs.equalities(); ++j)
    for (std::size_t i = 0; i < n; ++i)
      k[i] += forward[j] * pairs.forward[j][i] +
              backward[j] * pairs.backward[j][i];
  return k;
}

Vector improving_direction_inequality(const Matrix& rows, double bound) {
  const std::size_t n = rows.cols();
  auto u = min_l1_point(Matrix(0, n), {}, rows, Vector(rows.rows(), 1.0), n,
                        bound);
  if (!u)
    throw InternalInconsistency(
        "no improving direction although no multipliers exist");
  return *u;
}

namespace {

// Solves the small symmetric system a·y = b by Gaussian elimination with
// partial pivoting; nullopt when singular.
std::optional<Vector> solve_square(Matrix a, Vector b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (std::abs(a(piv, c)) < 1e-300) return std::nullopt;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
      b[r] -= f * b[c];
    }
  }
  Vector y(n);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t j = c + 1; j < n; ++j) s -= a(c, j) * y[j];
    y[c] = s / a(c, c);
  }
  return y;
}

// Least-norm correction so that h·u reproduces `target` to rounding.
void polish(const Matrix& h, const Vector& target, Vector& u) {
  const std::size_t q = h.rows();
  Vector res = multiply(h, u);
  for (std::size_t j = 0; j < q; ++j) res[j] = target[j] - res[j];
  if (norm_inf(res) == 0.0) return;
  Matrix gram(q, q);
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < q; ++b) gram(a, b) = dot(h.row(a), h.row(b));
  auto y = solve_square(gram, res);
  if (!y) return;
  const Vector du = multiply_transposed(h, *y);
  Vector fixed = u;
  for (std::size_t i = 0; i < u.size(); ++i) fixed[i] += du[i];
  Vector after = multiply(h, fixed);
  for (std::size_t j = 0; j < q; ++j) after[j] = target[j] - after[j];
  if (norm_inf(after) < norm_inf(res)) u = std::move(fixed);
}

}  // namespace

DirectionPairs direction_pairs(const Matrix& objective_and_active,
                               const Matrix& equality_jacobian,
                               double radius) {
  if (!(radius > 0.0)) throw InputError("cone radius must be positive");
  const std::size_t n = equality_jacobian.cols();
  const std::size_t q = equality_jacobian.rows();
  if (q == 0) throw InputError("direction pairs need at least one equality");

  Matrix g = objective_and_active;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    const double s = norm_inf(g.row(i));
    if (s == 0.0)
      throw InternalInconsistency(
          "a zero gradient row cannot be moved up by the cone radius");
    for (double& a : g.row(i)) a /= s;
  }
  const Vector b(g.rows(), radius);

  DirectionPairs pairs;
  pairs.radius = radius;
  for (int sign : {1, -1}) {
    for (std::size_t j = 0; j < q; ++j) {
      Vector target(q, 0.0);
      target[j] = sign * radius;
      auto u = min_l1_point(equality_jacobian, target, g, b, n);
      if (!u) {
        std::ostringstream m;
        m << "direction system for equality " << j + 1
          << (sign > 0 ? " (+r)" : " (-r)") << " is infeasible";
        throw InternalInconsistency(m.str());
      }
      polish(equality_jacobian, target, *u);
      Vector slack = multiply(g, *u);
      for (std::size_t i = 0; i < slack.size(); ++i) slack[i] = b[i] - slack[i];
      if (sign > 0) {
        pairs.forward.push_back(std::move(*u));
        pairs.forward_slack.push_back(std::move(slack));
      } else {
        pairs.backward.push_back(std::move(*u));
        pairs.backward_slack.push_back(std::move(slack));
      }
    }
  }
  return pairs;
}

Vector residual_w(std::span<const ScalarField> equalities,
                  std::span<const double> x, double alpha,
                  std::span<const double> k, const Matrix& equality_jacobian,
                  const DomainBox* domain) {
  const Vector p = axpy(x, alpha, k);
  if (domain != nullptr && !domain->contains(p))
    throw StepLeavesDomain("restoration step leaves the domain box");
  Vector w(equalities.size());
  for (std::size_t j = 0; j < equalities.size(); ++j)
    w[j] = equalities[j](p) / alpha - dot(equality_jacobian.row(j), k);
  return w;
}

SimplexState phi_map(const SimplexState& state, std::span<const double> w,
                     const DirectionPairs& pairs) {
  const std::size_t q = pairs.equalities();
  if (w.size() != q || state.forward.size() != q)
    throw DimensionMismatch("residual length does not match the pair count");
  const double r = pairs.radius;
  const double qd = static_cast<double>(q);
  if (!(norm_inf(w) < r / qd)) {
    std::ostringstream m;
    m << "equality residual " << norm_inf(w) << " is not below r/q = " << r / qd;
    throw ResidualTooLarge(m.str(), norm_inf(w), r / qd);
  }
  SimplexState out{Vector(q), Vector(q)};
  double sum = 0.0;
  for (std::size_t j = 0; j < q; ++j) {
    out.forward[j] = 1.0 / (2.0 * qd) - w[j] / (2.0 * r);
    out.backward[j] = 1.0 / (2.0 * qd) + w[j] / (2.0 * r);
    sum += out.forward[j] + out.backward[j];
  }
  for (std::size_t j = 0; j < q; ++j) {
    out.forward[j] /= sum;
    out.backward[j] /= sum;
  }
  return out;
}

namespace {

SimplexState from_offsets(std::span<const double> s, double r) {
  const std::size_t q = s.size();
  const double qd = static_cast<double>(q);
  SimplexState st{Vector(q), Vector(q)};
  for (std::size_t j = 0; j < q; ++j) {
    st.forward[j] = 1.0 / (2.0 * qd) - s[j] / (2.0 * r);
    st.backward[j] = 1.0 / (2.0 * qd) + s[j] / (2.0 * r);
  }
  return st;
}

// Gauss-Seidel sweeps of scalar bisections on s = w(k(s)), where s
// parametrizes the coefficients as in phi_map.
std::optional<Vector> bisection_fallback(const EqualityContext& ctx,
                                         const DirectionPairs& pairs,
                                         double alpha,
                                         const FixedPointConfig& cfg) {
  const std::size_t q = pairs.equalities();
  const double r = pairs.radius;
  const double edge = r / static_cast<double>(q);
  Vector s(q, 0.0);
  auto w_at = [&](const Vector& sv) {
    const Vector k = from_offsets(sv, r).point(pairs);
    return residual_w(ctx.equalities, ctx.point, alpha, k, ctx.jacobian,
                      ctx.domain);
  };
  for (int sweep = 0; sweep < cfg.max_iterations; ++sweep) {
    double change = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      Vector probe = s;
      auto f = [&](double sj) {
        probe[j] = sj;
        return w_at(probe)[j] - sj;
      };
      double lo = -edge, hi = edge;
      double flo = f(lo), fhi = f(hi);
      if (flo < 0.0 || fhi > 0.0) return std::nullopt;
      for (int it = 0; it < 200 && hi - lo > 1e-16 * edge; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0)
          lo = mid;
        else
          hi = mid;
      }
      const double sj = 0.5 * (lo + hi);
      change = std::max(change, std::abs(sj - s[j]));
      s[j] = sj;
    }
    if (change <= cfg.tolerance * 1e-2) return s;
  }
  return std::nullopt;
}

}  // namespace

FixedPointResult schauder_fixed_point(const EqualityContext& ctx,
                                      const DirectionPairs& pairs,
                                      double alpha, const FixedPointConfig& cfg,
                                      bool allow_fallback) {
  const std::size_t q = pairs.equalities();
  if (q == 0) throw InputError("fixed point needs at least one equality");
  if (!(alpha > 0.0)) throw InputError("step must be positive");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
    throw InputError("damping must lie in (0, 1]");

  FixedPointResult out;
  SimplexState state = SimplexState::barycenter(q);
  Vector k = state.point(pairs);
  const double theta = cfg.damping;

  auto phi = [&](const Vector& kk) {
    const Vector w = residual_w(ctx.equalities, ctx.point, alpha, kk,
                                ctx.jacobian, ctx.domain);
    return phi_map(state, w, pairs);
  };

  bool stalled = false;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const SimplexState image = phi(k);
    const Vector k_img = image.point(pairs);
    double res = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i)
      res = std::max(res, std::abs(k_img[i] - k[i]));
    out.residual_history.push_back(res);
    if (res <= cfg.tolerance) {
      out.k = k_img;
      out.state = image;
      out.iterations = it;
      return out;
    }
    if (it > 5 &&
        res > out.residual_history[it - 2] + 1e-15 * (1.0 + norm_inf(k))) {
      stalled = true;
      break;
    }
    for (std::size_t j = 0; j < q; ++j) {
      state.forward[j] = (1.0 - theta) * state.forward[j] + theta * image.forward[j];
      state.backward[j] =
          (1.0 - theta) * state.backward[j] + theta * image.backward[j];
    }
    k = state.point(pairs);
  }

  out.iterations = static_cast<int>(out.residual_history.size());
  if (allow_fallback) {
    if (auto s = bisection_fallback(ctx, pairs, alpha, cfg)) {
      state = from_offsets(*s, pairs.radius);
      k = state.point(pairs);
      const SimplexState image = phi(k);
      const Vector k_img = image.point(pairs);
      double res = 0.0;
      for (std::size_t i = 0; i < k.size(); ++i)
        res = std::max(res, std::abs(k_img[i] - k[i]));
      out.residual_history.push_back(res);
      if (res <= cfg.tolerance) {
        out.k = k_img;
        out.state = image;
        out.used_fallback = true;
        return out;
      }
    }
  }
  throw NonConvergence(stalled ? "damped fixed-point residual increased"
                               : "fixed-point iteration budget exhausted",
                       out.residual_history);
}

namespace {

struct Trial {
  bool ok = false;
  double gain = 0.0;
  Vector g;
  Vector h;
  std::string reason;
};

Trial evaluate_trial(const ProblemView& problem, std::span<const double> xp,
                     double f0, double restore_tolerance) {
  Trial t;
  if (!problem.domain.contains(xp)) {
    t.reason = "trial point leaves the domain";
    return t;
  }
  try {
    t.gain = problem.objective(xp) - f0;
    for (const auto& g : problem.inequalities) t.g.push_back(g(xp));
    for (const auto& h : problem.equalities) t.h.push_back(h(xp));
  } catch (const DomainFault& e) {
    t.reason = e.what();
    return t;
  }
  if (!(t.gain > 0.0)) {
    t.reason = "objective does not increase";
    return t;
  }
  for (double g : t.g)
    if (!(g > 0.0)) {
      t.reason = "an inequality is not strictly positive";
      return t;
    }
  for (double h : t.h)
    if (!(std::abs(h) <= restore_tolerance)) {
      t.reason = "equalities are not restored";
      return t;
    }
  t.ok = true;
  return t;
}

}  // namespace

AscentCertificate certify_nonoptimal(const ProblemView& problem,
                                     const Candidate& candidate,
                                     const NoMultipliers& data,
                                     const AscentConfig& cfg) {
  const Vector& x = candidate.point;
  const double f0 = problem.objective(x);
  const double r0 = cfg.domain_margin * problem.domain.distance_to_boundary(x);
  std::string last = "no trial was made";

  AscentCertificate cert;
  auto finish = [&](const Vector& xp, const Trial& t, double alpha, int b) {
    cert.improved_point = xp;
    cert.alpha = alpha;
    cert.objective_gain = t.gain;
    cert.inequality_values = t.g;
    cert.equality_values = t.h;
    for (double h : t.h)
      cert.max_equality_residual = std::max(cert.max_equality_residual, std::abs(h));
    cert.backtracks = b;
    return cert;
  };

  if (data.direction) {
    const Vector& u = *data.direction;
    const double un = norm_inf(u);
    double alpha = un > 0.0 ? std::min(1.0, r0 / un) : 1.0;
    cert.direction = u;
    for (int b = 0; b <= cfg.max_backtracks; ++b, alpha *= cfg.backtrack_factor) {
      const Vector xp = axpy(x, alpha, u);
      const Trial t = evaluate_trial(problem, xp, f0, cfg.restore_tolerance);
      if (t.ok) return finish(xp, t, alpha, b);
      last = t.reason;
    }
  } else if (data.pairs) {
    const DirectionPairs& pairs = *data.pairs;
    const EqualityContext ctx{problem.equalities, x, data.equality_jacobian,
                              &problem.domain};
    // Damped iteration alone over the whole sweep first; bisection only if
    // no step size works without it.
    for (bool fallback : {false, true}) {
      double alpha = std::min(1.0, r0 / pairs.max_norm());
      double shrink = cfg.backtrack_factor;
      for (int b = 0; b <= cfg.max_backtracks; ++b, alpha *= shrink) {
        shrink = cfg.backtrack_factor;
        FixedPointResult fp;
        try {
          fp = schauder_fixed_point(ctx, pairs, alpha, cfg.fixed_point, fallback);
        } catch (const NonConvergence& e) {
          last = e.what();
          continue;
        } catch (const ResidualTooLarge& e) {
          // w is O(α): aim for a quarter of the admissible residual.
          last = e.what();
          if (std::isfinite(e.residual()) && e.residual() > 0.0)
            shrink = std::min(shrink, 0.25 * e.limit() / e.residual());
          continue;
        } catch (const StepLeavesDomain& e) {
          last = e.what();
          continue;
        } catch (const DomainFault& e) {
          last = e.what();
          continue;
        }
        const Vector xp = axpy(x, alpha, fp.k);
        const Trial t = evaluate_trial(problem, xp, f0, cfg.restore_tolerance);
        if (t.ok) {
          cert.fixed_point = fp.k;
          cert.fixed_point_iterations = fp.iterations;
          cert.used_fallback = fp.used_fallback;
          return finish(xp, t, alpha, b);
        }
        last = t.reason;
      }
    }
  } else {
    throw InputError("no direction data to certify non-optimality with");
  }
  std::ostringstream m;
  m << "no improving feasible point after " << cfg.max_backtracks
    << " backtracks; last failure: " << last;
  throw CertificationFailed(m.str());
}

}  // namespace mrules

#include "mrules/differentiation.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace mrules {

void DiffConfig::validate() const {
  if (!(base_step > 0.0)) throw InputError("diff base step must be positive");
  if (!(step_decay > 0.0 && step_decay < 1.0))
    throw InputError("diff step decay must lie in (0, 1)");
  if (richardson_depth < 2) throw InputError("diff depth must be at least 2");
  if (linearity_samples < 0)
    throw InputError("linearity sample count must be non-negative");
  if (!(tolerance > 0.0)) throw InputError("diff tolerance must be positive");
}

LinearityViolation::LinearityViolation(Vector direction, double directional,
                                       double linear)
    : NumericalError([&] {
        std::ostringstream s;
        s << "directional derivative " << directional
          << " differs from the linear prediction " << linear;
        return s.str();
      }()),
      direction_(std::move(direction)),
      directional_(directional),
      linear_(linear) {}

std::string_view to_string(Differentiability d) {
  switch (d) {
    case Differentiability::kNotDirectional: return "NotDirectional";
    case Differentiability::kDirectionalNotLinear: return "DirectionalNotLinear";
    case Differentiability::kGateaux: return "Gateaux";
    case Differentiability::kHadamardConsistent: return "HadamardConsistent";
  }
  return "?";
}

namespace {

double evaluate_in_domain(const ScalarField& f, std::span<const double> p,
                          const DomainBox* domain) {
  if (domain != nullptr && !domain->contains(p))
    throw StepLeavesDomain("probe point leaves the domain box");
  return f(p);
}

struct Tableau {
  double estimate;
  double error_bound;
};

// Richardson extrapolation for sequences whose error expands in powers of
// the step: q(t) = L + c₁t + c₂t² + …, steps shrinking by `decay`.
Tableau richardson(std::span<const double> q, double decay) {
  const std::size_t m = q.size();
  std::vector<Vector> r(m, Vector(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    r[k][0] = q[k];
    double ratio = 1.0;
    for (std::size_t j = 1; j <= k; ++j) {
      ratio /= decay;
      r[k][j] = r[k][j - 1] + (r[k][j - 1] - r[k - 1][j - 1]) / (ratio - 1.0);
    }
  }
  const double last = r[m - 1][m - 1];
  return {last, std::abs(last - r[m - 2][m - 2])};
}

// Uniform on [-1, 1) from the raw 64-bit engine output, so the sampled
// directions do not depend on the standard library's distributions.
double uniform_sym(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

Vector random_unit(std::mt19937_64& rng, std::size_t n) {
  for (;;) {
    Vector h(n);
    for (double& v : h) v = uniform_sym(rng);
    const double len = norm_2(h);
    if (len > 1e-3) {
      for (double& v : h) v /= len;
      return h;
    }
  }
}

}  // namespace

double directional_quotient(const ScalarField& f, std::span<const double> x,
                            std::span<const double> h, double t,
                            const DomainBox* domain) {
  const Vector moved = axpy(x, t, h);
  const double fx = evaluate_in_domain(f, x, domain);
  return (evaluate_in_domain(f, moved, domain) - fx) / t;
}

DirectionalEstimate gateaux_directional(const ScalarField& f,
                                        std::span<const double> x,
                                        std::span<const double> h,
                                        const DiffConfig& cfg,
                                        const DomainBox* domain) {
  const double fx = evaluate_in_domain(f, x, domain);
  Vector q;
  double t = cfg.base_step;
  for (int k = 0; k <= cfg.richardson_depth; ++k) {
    const Vector moved = axpy(x, t, h);
    q.push_back((evaluate_in_domain(f, moved, domain) - fx) / t);
    t *= cfg.step_decay;
  }
  const Tableau tab = richardson(q, cfg.step_decay);
  if (!std::isfinite(tab.estimate) ||
      !(tab.error_bound <= cfg.tolerance * std::max(1.0, std::abs(tab.estimate)))) {
    std::ostringstream s;
    s << "directional quotient does not settle (extrapolants differ by "
      << tab.error_bound << ")";
    throw NonConvergent(s.str());
  }
  return {tab.estimate, tab.error_bound};
}

Vector gateaux_gradient(const ScalarField& f, std::span<const double> x,
                        const DiffConfig& cfg, const DomainBox* domain) {
  const std::size_t n = x.size();
  Vector grad(n);
  for (std::size_t i = 0; i < n; ++i)
    grad[i] = gateaux_directional(f, x, unit_vector(n, i), cfg, domain).estimate;

  const double bound = cfg.tolerance * (1.0 + norm_2(grad));
  auto audit = [&](const Vector& h) {
    const double d = gateaux_directional(f, x, h, cfg, domain).estimate;
    const double lin = dot(grad, h);
    if (std::abs(d - lin) > bound) throw LinearityViolation(h, d, lin);
  };
  for (std::size_t i = 0; i < n; ++i) audit(unit_vector(n, i, -1.0));
  std::mt19937_64 rng(cfg.seed);
  for (int s = 0; s < cfg.linearity_samples; ++s) audit(random_unit(rng, n));
  return grad;
}

HadamardProbe hadamard_probe(const ScalarField& f, std::span<const double> x,
                             std::span<const double> h, const DiffConfig& cfg,
                             const DomainBox* domain) {
  const std::size_t n = x.size();
  const double derivative = gateaux_directional(f, x, h, cfg, domain).estimate;
  const double fx = evaluate_in_domain(f, x, domain);
  const double bound = cfg.tolerance * std::max(1.0, std::abs(derivative));
  const Vector hv(h.begin(), h.end());

  // Evaluates one probed sequence given its points; returns a witness when
  // the quotients do not extrapolate to the Gâteaux value.
  auto check = [&](const std::vector<Vector>& points,
                   const Vector& steps) -> std::optional<HadamardWitness> {
    Vector q;
    for (std::size_t k = 0; k < points.size(); ++k)
      q.push_back((evaluate_in_domain(f, points[k], domain) - fx) / steps[k]);
    const Tableau tab = richardson(q, cfg.step_decay);
    const bool ok = std::isfinite(tab.estimate) &&
                    std::abs(tab.estimate - derivative) <= bound &&
                    tab.error_bound <= bound;
    if (ok) return std::nullopt;
    std::size_t worst = 0;
    for (std::size_t k = 1; k < q.size(); ++k)
      if (std::abs(q[k] - derivative) > std::abs(q[worst] - derivative))
        worst = k;
    HadamardWitness w;
    w.step = steps[worst];
    w.direction = Vector(n);
    for (std::size_t i = 0; i < n; ++i)
      w.direction[i] = (points[worst][i] - x[i]) / steps[worst];
    w.quotient = q[worst];
    w.derivative = derivative;
    return w;
  };

  Vector steps;
  double t = cfg.base_step;
  for (int k = 0; k <= cfg.richardson_depth; ++k) {
    steps.push_back(t);
    t *= cfg.step_decay;
  }

  // Perturbed directions h_k = h + δ_k·d with δ_k = t_k.
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const Vector d = unit_vector(n, i % n, i < n ? 1.0 : -1.0);
    std::vector<Vector> points;
    for (double tk : steps) points.push_back(axpy(x, tk, axpy(hv, tk, d)));
    if (auto w = check(points, steps)) return {false, std::move(w)};
  }

  // Curve-following sequence registered by the builtin, if it converges to h.
  const Builtin* b = f.builtin();
  if (b != nullptr && b->curve_point != nullptr) {
    std::vector<Vector> points;
    Vector dist;
    for (double tk : steps) {
      auto p = b->curve_point(x, h, tk);
      if (!p) break;
      Vector hk(n);
      for (std::size_t i = 0; i < n; ++i) hk[i] = ((*p)[i] - x[i]) / tk;
      Vector diff = hk;
      for (std::size_t i = 0; i < n; ++i) diff[i] -= h[i];
      dist.push_back(norm_inf(diff));
      points.push_back(std::move(*p));
    }
    const bool converging =
        points.size() == steps.size() && dist.back() <= dist.front() &&
        dist.back() <= std::max(1.0, norm_inf(h)) * cfg.base_step;
    if (converging)
      if (auto w = check(points, steps)) return {false, std::move(w)};
  }
  return {};
}

DiffVerdict classify(const ScalarField& f, std::span<const double> x,
                     const DiffConfig& cfg, const DomainBox* domain) {
  const std::size_t n = x.size();
  DiffVerdict v;
  try {
    v.gradient = gateaux_gradient(f, x, cfg, domain);
  } catch (const LinearityViolation& e) {
    v.level = Differentiability::kDirectionalNotLinear;
    v.failing_direction = e.direction();
    v.directional_value = e.directional();
    v.linear_value = e.linear();
    v.detail = e.what();
    return v;
  } catch (const NonConvergent& e) {
    v.level = Differentiability::kNotDirectional;
    // Locate the first canonical direction that fails, for the report.
    for (std::size_t i = 0; i < 2 * n && !v.failing_direction; ++i) {
      Vector h = unit_vector(n, i % n, i < n ? 1.0 : -1.0);
      try {
        gateaux_directional(f, x, h, cfg, domain);
      } catch (const NonConvergent&) {
        v.failing_direction = std::move(h);
      }
    }
    v.detail = e.what();
    return v;
  }

  v.level = Differentiability::kGateaux;
  for (std::size_t i = 0; i < n; ++i) {
    HadamardProbe p = hadamard_probe(f, x, unit_vector(n, i), cfg, domain);
    if (!p.consistent) {
      v.hadamard_witness = std::move(p.witness);
      v.failing_direction = unit_vector(n, i);
      v.detail = "quotients along a sequence converging to the direction do "
                 "not approach the Gateaux derivative";
      return v;
    }
  }
  v.level = Differentiability::kHadamardConsistent;
  return v;
}

}  // namespace mrules

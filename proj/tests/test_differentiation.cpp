#include <doctest.h>

#include <cmath>
#include <random>

#include "mrules/differentiation.hpp"
#include "mrules/error.hpp"
#include "support.hpp"

using namespace mrules;

namespace {

ScalarField field(const std::string& src, std::vector<std::string> vars = {"x1", "x2"}) {
  return ScalarField::parse(src, vars);
}

}  // namespace

TEST_CASE("directional quotient") {
  const double x[] = {1.0, 0.0};
  const double e1[] = {1.0, 0.0};
  CHECK(directional_quotient(field("x1^2"), x, e1, 0.1) ==
        doctest::Approx(2.1).epsilon(1e-14));
  const double y[] = {-3.0, 7.0};
  for (double t : {1.0, 0.1, 1e-3})
    CHECK(directional_quotient(field("x1"), y, e1, t) == doctest::Approx(1.0));
  const double zero[] = {0.0, 0.0};
  CHECK(directional_quotient(field("builtin:euclidean_norm"), zero, e1, 0.01) == 1.0);

  const DomainBox box({{-1.0, 1.05}, {-1.0, 1.0}});
  CHECK_THROWS_AS(directional_quotient(field("x1"), x, e1, 0.1, &box),
                  StepLeavesDomain);
}

TEST_CASE("one-sided quotient of the norm at zero is exactly the length") {
  const double zero[] = {0.0, 0.0};
  const ScalarField norm = field("builtin:euclidean_norm");
  const double h[] = {0.6, -0.8};
  DiffConfig cfg;
  double t = cfg.base_step;
  for (int k = 0; k <= cfg.richardson_depth; ++k, t *= cfg.step_decay)
    CHECK(directional_quotient(norm, zero, h, t) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Gateaux directional estimates") {
  DiffConfig cfg;
  const double half[] = {0.5, 0.5};
  const double e1[] = {1.0, 0.0};
  const auto a = gateaux_directional(field("x1^2 + x2^2"), half, e1, cfg);
  CHECK(std::abs(a.estimate - 1.0) <= 1e-8);

  const double zero1[] = {0.0};
  const double one[] = {1.0};
  const ScalarField ex = field("exp(x)", {"x"});
  CHECK(std::abs(gateaux_directional(ex, zero1, one, cfg).estimate - 1.0) <= 1e-8);
  CHECK(std::abs(gateaux_directional(ex, one, one, cfg).estimate - std::exp(1.0)) <= 1e-8);

  // Parabola indicator: no probed point lies on the parabola.
  const ScalarField pi = field("builtin:parabola_indicator");
  const double zero[] = {0.0, 0.0};
  double t = cfg.base_step;
  for (int k = 0; k <= cfg.richardson_depth; ++k, t *= cfg.step_decay) {
    const double p[] = {t, 0.0};
    CHECK(pi(p) == 0.0);
  }
  CHECK(gateaux_directional(pi, zero, e1, cfg).estimate == 0.0);
}

TEST_CASE("oscillating quotient does not converge") {
  DiffConfig cfg;
  const double zero[] = {0.0, 0.0};
  const double e1[] = {1.0, 0.0};
  CHECK_THROWS_AS(
      gateaux_directional(field("builtin:oscillating_norm"), zero, e1, cfg),
      NonConvergent);
  CHECK(classify(field("builtin:oscillating_norm"), zero, cfg).level ==
        Differentiability::kNotDirectional);
}

TEST_CASE("Gateaux gradients") {
  DiffConfig cfg;
  const double x[] = {-0.4, 2.5};
  const Vector g = gateaux_gradient(field("x1 + 2*x2"), x, cfg);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-12));

  const double p[] = {2.0, 3.0};
  const Vector q = gateaux_gradient(field("x1*x2"), p, cfg);
  CHECK(q[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(q[1] == doctest::Approx(2.0).epsilon(1e-10));

  const double zero[] = {0.0, 0.0};
  try {
    gateaux_gradient(field("builtin:euclidean_norm"), zero, cfg);
    FAIL("no violation");
  } catch (const LinearityViolation& e) {
    // Along −h the limit is ‖h‖ = 1 while the linear prediction is −1.
    const Vector& h = e.direction();
    CHECK(e.directional() == doctest::Approx(norm_2(h)));
    const Vector minus = {-h[0], -h[1]};
    CHECK(directional_quotient(field("builtin:euclidean_norm"), zero, minus, 1e-3) ==
          doctest::Approx(norm_2(h)));
    CHECK(std::abs(e.directional() - e.linear()) > 0.5);
  }
}

TEST_CASE("Hadamard probe") {
  DiffConfig cfg;
  const double x[] = {0.3, 0.4};
  const double e1[] = {1.0, 0.0};
  CHECK(hadamard_probe(field("x1^2 + x2^2"), x, e1, cfg).consistent);
  const double h[] = {0.3, -2.0};
  CHECK(hadamard_probe(field("3*x1 - x2 + 1"), x, h, cfg).consistent);

  const double zero[] = {0.0, 0.0};
  const ScalarField pi = field("builtin:parabola_indicator");
  const HadamardProbe probe = hadamard_probe(pi, zero, e1, cfg);
  REQUIRE_FALSE(probe.consistent);
  REQUIRE(probe.witness);
  const HadamardWitness& w = *probe.witness;
  // Witness direction is (1, t_k) and the point (t_k, t_k²) sits on the parabola.
  CHECK(w.direction[0] == doctest::Approx(1.0));
  CHECK(w.direction[1] == doctest::Approx(w.step));
  const double on[] = {w.step, w.step * w.step};
  CHECK(pi(on) == 1.0);
  CHECK(w.quotient == doctest::Approx(1.0 / w.step));
  CHECK(w.derivative == 0.0);
}

TEST_CASE("classification ladder") {
  DiffConfig cfg;
  const double x[] = {0.2, -0.7};
  CHECK(classify(field("x1^3 - 2*x1*x2 + x2^2"), x, cfg).level ==
        Differentiability::kHadamardConsistent);

  const double zero[] = {0.0, 0.0};
  const DiffVerdict pi = classify(field("builtin:parabola_indicator"), zero, cfg);
  CHECK(pi.level == Differentiability::kGateaux);
  CHECK(pi.hadamard_witness.has_value());
  REQUIRE(pi.gradient);
  CHECK(*pi.gradient == Vector{0.0, 0.0});

  const DiffVerdict nrm = classify(field("builtin:euclidean_norm"), zero, cfg);
  CHECK(nrm.level == Differentiability::kDirectionalNotLinear);
  CHECK(nrm.failing_direction.has_value());
}

TEST_CASE("Hadamard-consistent fields also pass the linearity audit") {
  DiffConfig cfg;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* src : {"x1^2 + x2^2", "exp(x1) * cos(x2)", "x1*x2 - x2^3"}) {
    for (int i = 0; i < 5; ++i) {
      const double x[] = {u(rng), u(rng)};
      const DiffVerdict v = classify(field(src), x, cfg);
      CHECK(v.level == Differentiability::kHadamardConsistent);
      CHECK_NOTHROW(gateaux_gradient(field(src), x, cfg));
    }
  }
}

TEST_CASE("directional estimates scale with the direction") {
  DiffConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* src : {"x1^2 + x2^2", "sin(x1) + x1*x2", "exp(x1 - x2)"}) {
    const double x[] = {u(rng), u(rng)};
    const double h[] = {u(rng), u(rng)};
    const double base = gateaux_directional(field(src), x, h, cfg).estimate;
    for (double c : {2.0, 10.0}) {
      const double ch[] = {c * h[0], c * h[1]};
      const double scaled = gateaux_directional(field(src), x, ch, cfg).estimate;
      CHECK(std::abs(scaled - c * base) <= cfg.tolerance * std::max(1.0, std::abs(c * base)));
    }
  }
}

TEST_CASE("builtin analytic gradients agree with the estimates") {
  DiffConfig cfg;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const ScalarField norm = field("builtin:euclidean_norm");
  for (int i = 0; i < 100; ++i) {
    const double x[] = {u(rng), u(rng)};
    if (norm_2(x) < 0.2) continue;
    const Vector est = gateaux_gradient(norm, x, cfg);
    const Vector exact = *norm.builtin()->gradient(std::span<const double>(x));
    CHECK(std::max(std::abs(est[0] - exact[0]), std::abs(est[1] - exact[1])) <= 1e-6);
  }
}

TEST_CASE("configuration validation") {
  DiffConfig cfg;
  cfg.step_decay = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.richardson_depth = 1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.base_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

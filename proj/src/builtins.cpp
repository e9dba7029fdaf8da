#include "mrules/builtins.hpp"

#include <cmath>

namespace mrules {
namespace {

// 1 on {y = x², x ≠ 0}, 0 elsewhere. Every directional quotient at the
// origin vanishes for small t, yet the quotient along (t, t²) is 1/t.
double parabola_indicator(std::span<const double> x) {
  return (x[0] != 0.0 && x[1] == x[0] * x[0]) ? 1.0 : 0.0;
}

std::optional<Vector> parabola_curve(std::span<const double> x,
                                     std::span<const double> h, double t) {
  // Only meaningful when the base point is on the closure of the curve.
  if (x[1] != x[0] * x[0]) return std::nullopt;
  const double px = x[0] + t * h[0];
  return Vector{px, px * px};
}

double euclidean_norm(std::span<const double> x) { return norm_2(x); }

std::optional<Vector> euclidean_norm_gradient(std::span<const double> x) {
  const double r = norm_2(x);
  if (r == 0.0) return std::nullopt;
  Vector g(x.begin(), x.end());
  for (double& v : g) v /= r;
  return g;
}

// ‖x‖·sin(1/‖x‖), extended by 0 at the origin: continuous, but its
// directional quotients at 0 oscillate without limit.
double oscillating_norm(std::span<const double> x) {
  const double r = norm_2(x);
  return r == 0.0 ? 0.0 : r * std::sin(1.0 / r);
}

constexpr Builtin kBuiltins[] = {
    {"parabola_indicator", 2, &parabola_indicator, &parabola_curve, nullptr},
    {"euclidean_norm", 0, &euclidean_norm, nullptr, &euclidean_norm_gradient},
    {"oscillating_norm", 0, &oscillating_norm, nullptr, nullptr},
};

}  // namespace

const Builtin* find_builtin(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return &b;
  return nullptr;
}

std::span<const Builtin> all_builtins() { return kBuiltins; }

}  // namespace mrules

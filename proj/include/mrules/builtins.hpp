#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "mrules/linalg.hpp"

namespace mrules {

/// Native scalar fields that the expression grammar cannot express.
/// Referenced from problem files as "builtin:<name>".
struct Builtin {
  std::string_view name;
  /// Required dimension; 0 accepts any.
  std::size_t arity;
  double (*evaluate)(std::span<const double> x);
  /// Adversarial path for the Hadamard probe: a point on a curve through `x`
  /// reached with step `t` roughly along `h`. Null when none is registered;
  /// an empty optional when the curve does not pass near `x`.
  std::optional<Vector> (*curve_point)(std::span<const double> x,
                                       std::span<const double> h,
                                       double t) = nullptr;
  /// Analytic gradient where one exists, for test oracles.
  std::optional<Vector> (*gradient)(std::span<const double> x) = nullptr;
};

/// nullptr when no builtin has that name.
const Builtin* find_builtin(std::string_view name);

std::span<const Builtin> all_builtins();

}  // namespace mrules

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "mrules/error.hpp"
#include "mrules/linalg.hpp"
#include "mrules/problem.hpp"

namespace mrules {

inline constexpr std::uint64_t kDefaultSeed = 0x6d72756c6573ULL;

/// Discretization of the one-sided limit t ↓ 0.
struct DiffConfig {
  double base_step = 1e-2;
  double step_decay = 0.5;
  int richardson_depth = 4;
  int linearity_samples = 16;
  double tolerance = 1e-6;
  /// Seeds the random directions of the linearity audit.
  std::uint64_t seed = kDefaultSeed;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

struct DirectionalEstimate {
  double estimate = 0.0;
  double error_bound = 0.0;
};

/// The directional limit exists but is not linear in the direction.
class LinearityViolation : public NumericalError {
 public:
  LinearityViolation(Vector direction, double directional, double linear);
  const Vector& direction() const { return direction_; }
  /// Estimated limit along `direction`.
  double directional() const { return directional_; }
  /// ⟨gradient, direction⟩.
  double linear() const { return linear_; }

 private:
  Vector direction_;
  double directional_;
  double linear_;
};

/// (f(x + t·h) − f(x)) / t, exactly as evaluated.
double directional_quotient(const ScalarField& f, std::span<const double> x,
                            std::span<const double> h, double t,
                            const DomainBox* domain = nullptr);

/// Richardson-extrapolated limit of the quotient over t₀·decayᵏ, k = 0..depth.
/// Throws NonConvergent when the last two extrapolants disagree.
DirectionalEstimate gateaux_directional(const ScalarField& f,
                                        std::span<const double> x,
                                        std::span<const double> h,
                                        const DiffConfig& cfg,
                                        const DomainBox* domain = nullptr);

/// Gradient from canonical directions, audited for linearity against the
/// negated canonical directions and `linearity_samples` random unit
/// directions. Throws LinearityViolation.
Vector gateaux_gradient(const ScalarField& f, std::span<const double> x,
                        const DiffConfig& cfg,
                        const DomainBox* domain = nullptr);

struct HadamardWitness {
  double step = 0.0;
  Vector direction;
  double quotient = 0.0;
  double derivative = 0.0;
};

/// Consistent when every probed sequence agrees with the Gâteaux value.
/// Finite probes can refute Hadamard differentiability, never prove it.
struct HadamardProbe {
  bool consistent = true;
  std::optional<HadamardWitness> witness;
};

HadamardProbe hadamard_probe(const ScalarField& f, std::span<const double> x,
                             std::span<const double> h, const DiffConfig& cfg,
                             const DomainBox* domain = nullptr);

/// Ordered: each level implies the ones before it.
enum class Differentiability {
  kNotDirectional,
  kDirectionalNotLinear,
  kGateaux,
  kHadamardConsistent,
};

std::string_view to_string(Differentiability d);

struct DiffVerdict {
  Differentiability level = Differentiability::kNotDirectional;
  /// Present from kGateaux upwards.
  std::optional<Vector> gradient;
  /// Direction along which the quotient did not settle or was not linear.
  std::optional<Vector> failing_direction;
  std::optional<double> directional_value;
  std::optional<double> linear_value;
  std::optional<HadamardWitness> hadamard_witness;
  std::string detail;
};

DiffVerdict classify(const ScalarField& f, std::span<const double> x,
                     const DiffConfig& cfg, const DomainBox* domain = nullptr);

}  // namespace mrules

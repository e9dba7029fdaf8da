#pragma once

#include <optional>
#include <string_view>

#include "mrules/ascent.hpp"
#include "mrules/multipliers.hpp"
#include "mrules/problem.hpp"

namespace mrules {

enum class Verdict { kFritzJohn, kKkt, kNotOptimal, kDegenerate };

std::string_view to_string(Verdict v);

/// 0 for FJ/KKT, 3 NOT_OPTIMAL, 4 DEGENERATE.
int exit_code(Verdict v);

struct AnalysisOptions {
  /// Report the raw Fritz John form instead of attempting KKT.
  bool fritz_john_only = false;
  /// Build an ascent certificate when no multipliers exist.
  bool certify_ascent = true;
};

struct Analysis {
  Verdict verdict = Verdict::kFritzJohn;
  ActiveSet active;
  /// ‖(λ, μ)‖₁ = 1 form.
  std::optional<MultiplierCertificate> fritz_john;
  /// λ₀ = 1 form, when available.
  std::optional<MultiplierCertificate> kkt;
  CqReport cq;
  std::optional<NoMultipliers> no_multipliers;
  std::optional<AscentCertificate> ascent;
};

/// Full pipeline: active set, multipliers or ascent, constraint
/// qualifications. Throws InputError / NumericalError subclasses.
Analysis analyze(const Problem& problem, const Candidate& candidate,
                 const EngineConfig& cfg, const AnalysisOptions& opts = {});

}  // namespace mrules

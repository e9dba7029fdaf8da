#include "mrules/analysis.hpp"

namespace mrules {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kFritzJohn: return "FJ";
    case Verdict::kKkt: return "KKT";
    case Verdict::kNotOptimal: return "NOT_OPTIMAL";
    case Verdict::kDegenerate: return "DEGENERATE";
  }
  return "?";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::kFritzJohn:
    case Verdict::kKkt: return 0;
    case Verdict::kNotOptimal: return 3;
    case Verdict::kDegenerate: return 4;
  }
  return 2;
}

Analysis analyze(const Problem& problem, const Candidate& candidate,
                 const EngineConfig& cfg, const AnalysisOptions& opts) {
  const ProblemView pv = view(problem);
  Analysis a;
  a.active = active_set(pv, candidate, cfg.activity_tolerance);

  MultiplierResult result = fritz_john(problem, candidate, cfg);

  const Linearization lin =
      linearize(pv, candidate.point, a.active.indices, cfg.diff);
  Matrix active_rows(0, pv.dimension());
  for (std::size_t i = 1; i < lin.objective_and_active.rows(); ++i)
    active_rows.append_row(lin.objective_and_active.row(i));
  a.cq = constraint_qualifications(active_rows, lin.equality_jacobian,
                                   pv.dimension(), pv.mixed);

  if (auto* none = std::get_if<NoMultipliers>(&result)) {
    a.verdict = Verdict::kNotOptimal;
    if (opts.certify_ascent)
      a.ascent = certify_nonoptimal(pv, candidate, *none, cfg.ascent);
    a.no_multipliers = std::move(*none);
    return a;
  }

  auto& cert = std::get<MultiplierCertificate>(result);
  a.fritz_john = cert;
  if (opts.fritz_john_only) {
    a.verdict = Verdict::kFritzJohn;
  } else if (cert.lambda[0] > cfg.stationarity_tolerance) {
    a.kkt = normalize_kkt(cert, cfg.stationarity_tolerance);
    a.verdict = Verdict::kKkt;
  } else {
    a.verdict = Verdict::kDegenerate;
  }
  return a;
}

}  // namespace mrules

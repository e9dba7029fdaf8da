#include "mrules/certificate.hpp"

#include <cstdio>

namespace mrules {

std::uint64_t problem_hash(const Problem& problem, const Candidate& candidate) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_problem(problem, candidate)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_string(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

namespace {

Json indices_1based(const std::vector<std::size_t>& idx) {
  Json a = Json::array();
  for (std::size_t i : idx) a.push_back(i + 1);
  return a;
}

Json vec(const Vector& v) { return Json(v); }

Json opt_vec(const std::optional<Vector>& v) {
  return v ? vec(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const MultiplierCertificate& cert) {
  Json j;
  j["normalization"] = std::string(to_string(cert.normalization));
  j["lambda"] = vec(cert.lambda);
  j["mu"] = vec(cert.mu);
  j["stationarity_residual"] = cert.stationarity_residual;
  j["complementary_slackness"] = vec(cert.complementary_slackness);
  return j;
}

Json to_json(const CqReport& cq) {
  Json j;
  j["slater"] = {{"holds", cq.positive_direction_holds},
                 {"direction", opt_vec(cq.positive_direction)}};
  j["rank"] = {{"rank", cq.equality_rank},
               {"equalities", cq.equality_count},
               {"independent", cq.independent}};
  if (cq.mixed)
    j["kernel"] = {{"holds", cq.kernel_direction_holds},
                   {"direction", opt_vec(cq.kernel_direction)}};
  else
    j["kernel"] = nullptr;
  j["guarantees_kkt"] = cq.guarantees_kkt();
  return j;
}

Json to_json(const AscentCertificate& cert) {
  Json j;
  j["improved_point"] = vec(cert.improved_point);
  j["alpha"] = cert.alpha;
  j["objective_gain"] = cert.objective_gain;
  if (cert.direction) j["direction"] = vec(*cert.direction);
  if (cert.fixed_point) {
    j["fixed_point"] = vec(*cert.fixed_point);
    j["fixed_point_iterations"] = cert.fixed_point_iterations;
    j["used_fallback"] = cert.used_fallback;
  }
  j["inequality_values"] = vec(cert.inequality_values);
  j["equality_values"] = vec(cert.equality_values);
  j["max_equality_residual"] = cert.max_equality_residual;
  j["backtracks"] = cert.backtracks;
  return j;
}

Json to_json(const DiffVerdict& v) {
  Json j;
  j["level"] = std::string(to_string(v.level));
  j["gradient"] = opt_vec(v.gradient);
  j["failing_direction"] = opt_vec(v.failing_direction);
  j["directional_value"] =
      v.directional_value ? Json(*v.directional_value) : Json(nullptr);
  j["linear_value"] = v.linear_value ? Json(*v.linear_value) : Json(nullptr);
  if (v.hadamard_witness) {
    const auto& w = *v.hadamard_witness;
    j["hadamard_witness"] = {{"step", w.step},
                             {"direction", vec(w.direction)},
                             {"quotient", w.quotient},
                             {"derivative", w.derivative}};
  } else {
    j["hadamard_witness"] = nullptr;
  }
  j["detail"] = v.detail;
  return j;
}

Json certificate_document(const Problem& problem, const Candidate& candidate,
                          const Analysis& a) {
  Json doc;
  doc["format"] = "mrules-certificate/1";
  doc["problem_hash"] = hash_string(problem_hash(problem, candidate));
  doc["kind"] = std::holds_alternative<MixedProblem>(problem) ? "mixed"
                                                              : "inequality";
  doc["point"] = vec(candidate.point);
  doc["verdict"] = std::string(to_string(a.verdict));
  doc["activity_tolerance"] = a.active.tolerance;
  doc["active_set"] = indices_1based(a.active.indices);
  doc["near_active"] = indices_1based(a.active.near_active);
  doc["inequality_values"] = vec(a.active.inequality_values);
  doc["equality_values"] = vec(a.active.equality_values);
  doc["fritz_john"] = a.fritz_john ? to_json(*a.fritz_john) : Json(nullptr);
  doc["kkt"] = a.kkt ? to_json(*a.kkt) : Json(nullptr);
  doc["cq"] = to_json(a.cq);
  doc["ascent"] = a.ascent ? to_json(*a.ascent) : Json(nullptr);
  Json notes = Json::array();
  if (a.fritz_john)
    for (const auto& n : a.fritz_john->notes) notes.push_back(n);
  if (a.verdict == Verdict::kDegenerate)
    notes.push_back("leading multiplier vanishes; no KKT form exists here");
  notes.push_back(
      "necessary conditions only; a certificate never asserts optimality");
  doc["notes"] = std::move(notes);
  return doc;
}

std::string render(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace mrules

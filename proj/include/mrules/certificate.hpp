#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "mrules/analysis.hpp"
#include "mrules/differentiation.hpp"
#include "mrules/problem.hpp"

namespace mrules {

using Json = nlohmann::ordered_json;

/// FNV-1a 64 of the canonical problem text.
std::uint64_t problem_hash(const Problem& problem, const Candidate& candidate);
std::string hash_string(std::uint64_t h);

Json to_json(const MultiplierCertificate& cert);
Json to_json(const CqReport& cq);
Json to_json(const AscentCertificate& cert);
Json to_json(const DiffVerdict& verdict);

/// The certificate document written by `check` and `ascend`. Constraint
/// indices are 1-based. Contains no time-dependent fields.
Json certificate_document(const Problem& problem, const Candidate& candidate,
                          const Analysis& analysis);

/// Two-space indented text with a trailing newline.
std::string render(const Json& doc);

}  // namespace mrules

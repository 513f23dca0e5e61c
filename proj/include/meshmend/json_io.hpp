// JSON forms of reports, audits and injection specs.
#pragma once

#include <json.hpp>

#include "meshmend/pipeline.hpp"
#include "meshmend/report.hpp"

namespace meshmend {

// Array of {stage, vertices_before, vertices_after, faces_before,
// faces_after, removed_or_flipped, ms}.
nlohmann::json report_to_json(const RepairReport& report);
RepairReport report_from_json(const nlohmann::json& j);

nlohmann::json audit_to_json(const AuditReport& audit);

nlohmann::json truth_to_json(const InjectionTruth& truth);

// Missing keys keep their defaults; unknown keys are rejected.
InjectionSpec injection_spec_from_json(const nlohmann::json& j);

}  // namespace meshmend

#include "meshmend/json_io.hpp"

#include "meshmend/error.hpp"

namespace meshmend {

nlohmann::json report_to_json(const RepairReport& report) {
    nlohmann::json out = nlohmann::json::array();
    for (const StageEntry& s : report.stages) {
        out.push_back({{"stage", s.stage},
                       {"vertices_before", s.vertices_before},
                       {"vertices_after", s.vertices_after},
                       {"faces_before", s.faces_before},
                       {"faces_after", s.faces_after},
                       {"removed_or_flipped", s.removed_or_flipped},
                       {"ms", s.ms}});
    }
    return out;
}

RepairReport report_from_json(const nlohmann::json& j) {
    RepairReport report;
    for (const auto& e : j) {
        StageEntry s;
        s.stage = e.at("stage").get<std::string>();
        s.vertices_before = e.at("vertices_before").get<std::size_t>();
        s.vertices_after = e.at("vertices_after").get<std::size_t>();
        s.faces_before = e.at("faces_before").get<std::size_t>();
        s.faces_after = e.at("faces_after").get<std::size_t>();
        s.removed_or_flipped = e.at("removed_or_flipped").get<std::size_t>();
        s.ms = e.at("ms").get<double>();
        report.stages.push_back(std::move(s));
    }
    return report;
}

nlohmann::json audit_to_json(const AuditReport& a) {
    return {{"duplicate_vertices", a.duplicate_vertices},
            {"duplicate_faces", a.duplicate_faces},
            {"degenerate_faces", a.degenerate_faces},
            {"isolated_vertices", a.isolated_vertices},
            {"self_intersecting_pairs", a.self_intersecting_pairs},
            {"inner_faces", a.inner_faces}};
}

nlohmann::json truth_to_json(const InjectionTruth& t) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [a, b] : t.crossing_pairs) pairs.push_back({a, b});
    return {{"duplicate_vertices", t.duplicate_vertices},
            {"duplicate_faces", t.duplicate_faces},
            {"isolated_vertices", t.isolated_vertices},
            {"degenerate_faces", t.degenerate_faces},
            {"crossing_pairs", pairs},
            {"flipped_faces", t.flipped_faces},
            {"inner_faces", t.inner_faces}};
}

InjectionSpec injection_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw PreconditionError("injection spec must be a JSON object");
    InjectionSpec spec;
    for (const auto& [key, value] : j.items()) {
        if (key == "duplicate_vertices") spec.duplicate_vertices = value.get<std::size_t>();
        else if (key == "duplicate_faces") spec.duplicate_faces = value.get<std::size_t>();
        else if (key == "isolated_vertices") spec.isolated_vertices = value.get<std::size_t>();
        else if (key == "degenerate_faces") spec.degenerate_faces = value.get<std::size_t>();
        else if (key == "crossing_pairs") spec.crossing_pairs = value.get<std::size_t>();
        else if (key == "flipped_faces") spec.flipped_faces = value.get<std::size_t>();
        else if (key == "inner_shell") spec.inner_shell = value.get<bool>();
        else if (key == "inner_shell_scale") spec.inner_shell_scale = value.get<double>();
        else if (key == "seed") spec.seed = value.get<std::uint64_t>();
        else throw PreconditionError("unknown injection spec key: " + key);
    }
    return spec;
}

}  // namespace meshmend

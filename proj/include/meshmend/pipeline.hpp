// End-to-end repair: cleanup, normalization, self-intersection remeshing,
// simplification, orientation correction and inner-face removal, plus the
// audit / injection / slicing tools used to check the result.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meshmend/cleanup.hpp"
#include "meshmend/mesh.hpp"
#include "meshmend/report.hpp"
#include "meshmend/visibility.hpp"

namespace meshmend {

enum class Stage {
    Dedup,
    RemoveDegenerate,
    RemoveIsolated,
    Normalize,
    Remesh,
    DedupAfterRemesh,
    Simplify,
    CorrectOrientation,
    RemoveInner,
};

inline constexpr std::size_t kStageCount = 9;
inline constexpr Stage kAllStages[kStageCount] = {
    Stage::Dedup,         Stage::RemoveDegenerate, Stage::RemoveIsolated,
    Stage::Normalize,     Stage::Remesh,           Stage::DedupAfterRemesh,
    Stage::Simplify,      Stage::CorrectOrientation, Stage::RemoveInner,
};

// Report name, e.g. "remove_degenerate".
const char* stage_name(Stage stage);
std::optional<Stage> stage_from_name(std::string_view name);

inline constexpr double kRemeshWeldTolerance = 1e-9;
inline constexpr std::size_t kMaxRemeshPasses = 3;

struct PipelineConfig {
    std::size_t target_vertices = 10'000;  // 0 skips simplification
    double dedup_tolerance = 0.0;
    double degeneracy_epsilon = kDefaultDegeneracyEpsilon;
    std::size_t samples_per_segment = 2;
    RaySamplingPlan rays;
    unsigned workers = 0;  // 0 = hardware concurrency; overrides rays.workers
    bool enabled[kStageCount] = {true, true, true, true, true, true, true, true, true};

    bool stage_enabled(Stage s) const { return enabled[static_cast<std::size_t>(s)]; }
    void set_stage_enabled(Stage s, bool on) { enabled[static_cast<std::size_t>(s)] = on; }
};

struct RemeshSummary {
    std::size_t passes = 0;
    std::size_t residual_pairs = 0;   // ProperSegment pairs left after the last pass
    std::size_t coplanar_pairs = 0;   // detected in the first pass, not remeshed
    std::size_t failed_faces = 0;     // faces whose triangulation failed, over all passes
};

struct PipelineResult {
    Mesh mesh;
    RepairReport report;
    bool partial_failure = false;
    std::string failed_stage;
    std::string error;
    RemeshSummary remesh;
    std::optional<Mesh> before_inner;  // mesh entering inner-face removal, when that stage ran
};

// Runs the enabled stages in fixed order. A stage that throws ends the run:
// the result holds the mesh produced by the stages before it, with
// partial_failure set. Throws PreconditionError when the input has no faces.
PipelineResult run_pipeline(const Mesh& mesh, const PipelineConfig& config);

// --- audit -----------------------------------------------------------------

struct AuditReport {
    std::size_t duplicate_vertices = 0;
    std::size_t duplicate_faces = 0;
    std::size_t degenerate_faces = 0;
    std::size_t isolated_vertices = 0;
    std::size_t self_intersecting_pairs = 0;
    std::size_t inner_faces = 0;

    bool clean() const {
        return duplicate_vertices == 0 && duplicate_faces == 0 && degenerate_faces == 0 &&
               isolated_vertices == 0 && self_intersecting_pairs == 0 && inner_faces == 0;
    }
    friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

// Counts each deficiency class on `mesh` as it is, using the tolerances and
// ray plan of `config`. Faces without area are not ray-tested.
AuditReport audit_deficiencies(const Mesh& mesh, const PipelineConfig& config);

// --- injection -------------------------------------------------------------

struct InjectionSpec {
    std::size_t duplicate_vertices = 0;
    std::size_t duplicate_faces = 0;
    std::size_t isolated_vertices = 0;
    std::size_t degenerate_faces = 0;
    std::size_t crossing_pairs = 0;
    std::size_t flipped_faces = 0;
    bool inner_shell = false;
    double inner_shell_scale = 0.5;
    std::uint64_t seed = 0;
};

// Indices refer to the injected mesh.
struct InjectionTruth {
    std::vector<Index> duplicate_vertices;  // the appended copies
    std::vector<Index> duplicate_faces;     // the appended copies
    std::vector<Index> isolated_vertices;
    std::vector<Index> degenerate_faces;
    std::vector<std::pair<Index, Index>> crossing_pairs;
    std::vector<Index> flipped_faces;
    std::vector<Index> inner_faces;
};

struct InjectionResult {
    Mesh mesh;
    InjectionTruth truth;
};

// Adds deficiencies to a clean closed mesh:
//  * duplicate vertices: a copy of a vertex used by >= 2 faces, with one of
//    those faces re-pointed to the copy;
//  * duplicate faces: a rotated copy of an existing face;
//  * isolated vertices: random points in the bounding box;
//  * degenerate faces: (a, m, b) over an existing edge (a, b) and a new
//    vertex m at its midpoint;
//  * crossing pairs: two small triangles crossing each other near the
//    bounding-box center;
//  * flipped faces: existing faces with reversed winding;
//  * inner shell: a copy of the surface scaled about the bounding-box center.
// The zero spec returns the input unchanged. Throws PreconditionError when a
// count exceeds what the mesh can supply.
InjectionResult inject_deficiencies(const Mesh& mesh, const InjectionSpec& spec);

// --- slicing ---------------------------------------------------------------

// Faces whose centroid satisfies dot(centroid - point, normal) < 0, with
// unreferenced vertices dropped.
Mesh slice_mesh(const Mesh& mesh, const Vec3& point, const Vec3& normal);

// Writes slice_mesh(...) to `path` (format from the extension).
void slice_export(const Mesh& mesh, const Vec3& point, const Vec3& normal, const std::filesystem::path& path);

}  // namespace meshmend

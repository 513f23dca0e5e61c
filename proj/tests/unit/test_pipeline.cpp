#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "meshmend/error.hpp"
#include "meshmend/json_io.hpp"
#include "meshmend/mesh_io.hpp"
#include "meshmend/pipeline.hpp"
#include "oracles.hpp"

using namespace meshmend;

namespace {

PipelineConfig fast_config(std::uint64_t seed = 1) {
    PipelineConfig c;
    c.rays.seed = seed;
    c.rays.rays_total = 20'000;
    return c;
}

InjectionSpec full_spec() {
    InjectionSpec s;
    s.duplicate_vertices = 4;
    s.duplicate_faces = 3;
    s.isolated_vertices = 5;
    s.degenerate_faces = 3;
    s.crossing_pairs = 2;
    s.flipped_faces = 6;
    s.inner_shell = true;
    s.seed = 17;
    return s;
}

std::vector<std::string> stage_names(const RepairReport& r) {
    std::vector<std::string> out;
    for (const auto& s : r.stages) out.push_back(s.stage);
    return out;
}

}  // namespace

TEST_CASE("stage names round trip") {
    for (Stage s : kAllStages) CHECK(stage_from_name(stage_name(s)) == s);
    CHECK_FALSE(stage_from_name("bogus"));
}

TEST_CASE("clean cube only gets normalized") {
    const Mesh cube = fixtures::unit_cube();
    const PipelineResult r = run_pipeline(cube, fast_config());
    CHECK_FALSE(r.partial_failure);
    CHECK(r.mesh.faces == cube.faces);
    const Mesh normalized_cube = normalize_unit_sphere(cube);
    CHECK(r.mesh.vertices == normalized_cube.vertices);
    for (const auto& s : r.report.stages) CHECK(s.removed_or_flipped == 0);
    CHECK(stage_names(r.report) == std::vector<std::string>{"dedup", "remove_degenerate", "remove_isolated",
                                                             "normalize", "remesh", "dedup_after_remesh",
                                                             "simplify", "correct_orientation", "remove_inner"});
}

TEST_CASE("report counts chain from stage to stage") {
    const Mesh m = inject_deficiencies(fixtures::icosphere(2), full_spec()).mesh;
    const PipelineResult r = run_pipeline(m, fast_config());
    REQUIRE_FALSE(r.report.stages.empty());
    CHECK(r.report.stages.front().vertices_before == m.vertex_count());
    CHECK(r.report.stages.front().faces_before == m.face_count());
    for (std::size_t i = 0; i + 1 < r.report.stages.size(); ++i) {
        CHECK(r.report.stages[i].vertices_after == r.report.stages[i + 1].vertices_before);
        CHECK(r.report.stages[i].faces_after == r.report.stages[i + 1].faces_before);
    }
    CHECK(r.report.stages.back().vertices_after == r.mesh.vertex_count());
    CHECK(r.report.stages.back().faces_after == r.mesh.face_count());
}

TEST_CASE("injected deficiencies are all repaired") {
    const Mesh sphere = fixtures::icosphere(2);
    const InjectionResult inj = inject_deficiencies(sphere, full_spec());
    const PipelineConfig config = fast_config(5);
    const PipelineResult r = run_pipeline(inj.mesh, config);
    CHECK_FALSE(r.partial_failure);

    CHECK(r.report.find("dedup")->removed_or_flipped == 4 + 3);
    CHECK(r.report.find("remove_degenerate")->removed_or_flipped == 3);
    CHECK(r.report.find("remove_isolated")->removed_or_flipped == 5 + 3);
    CHECK(r.report.find("remesh")->removed_or_flipped == 4);
    CHECK(r.report.find("correct_orientation")->removed_or_flipped >= 6);
    CHECK(r.remesh.residual_pairs == 0);

    // What is left is the original sphere, up to normalization.
    CHECK(r.mesh.face_count() == sphere.face_count());
    CHECK(r.mesh.vertex_count() == sphere.vertex_count());
    CHECK(signed_volume(r.mesh) > 0.0);
    CHECK(audit_deficiencies(r.mesh, config).clean());
}

TEST_CASE("second run removes nothing in the cleanup stages") {
    const Mesh m = inject_deficiencies(fixtures::icosphere(2), full_spec()).mesh;
    const PipelineConfig config = fast_config(3);
    const PipelineResult first = run_pipeline(m, config);
    const PipelineResult second = run_pipeline(first.mesh, config);
    for (const char* stage : {"dedup", "remove_degenerate", "remove_isolated"})
        CHECK(second.report.find(stage)->removed_or_flipped == 0);
}

TEST_CASE("disabled stages are skipped without reordering") {
    PipelineConfig c = fast_config();
    c.set_stage_enabled(Stage::Normalize, false);
    c.set_stage_enabled(Stage::RemoveInner, false);
    c.target_vertices = 0;
    const PipelineResult r = run_pipeline(fixtures::nested_cubes(), c);
    CHECK(stage_names(r.report) == std::vector<std::string>{"dedup", "remove_degenerate", "remove_isolated",
                                                             "remesh", "dedup_after_remesh",
                                                             "correct_orientation"});
    CHECK(r.mesh == fixtures::nested_cubes());
    CHECK_FALSE(r.before_inner);
}

TEST_CASE("simplification runs inside the pipeline") {
    PipelineConfig c = fast_config();
    c.target_vertices = 50;
    const PipelineResult r = run_pipeline(fixtures::icosphere(3), c);
    CHECK(r.report.find("simplify")->vertices_after == 50);
    CHECK(r.mesh.vertex_count() == 50);
}

TEST_CASE("a failing stage returns the earlier result") {
    // All vertices coincide, so normalization cannot scale; an earlier
    // stage must not remove the face first.
    PipelineConfig c = fast_config();
    c.set_stage_enabled(Stage::RemoveDegenerate, false);
    const Mesh m{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, {{0, 1, 2}}};
    c.set_stage_enabled(Stage::Dedup, false);
    const PipelineResult r = run_pipeline(m, c);
    CHECK(r.partial_failure);
    CHECK(r.failed_stage == "normalize");
    CHECK_FALSE(r.error.empty());
    CHECK(r.mesh == m);
    CHECK(stage_names(r.report) == std::vector<std::string>{"remove_isolated"});
}

TEST_CASE("pipeline preconditions") {
    CHECK_THROWS_AS(run_pipeline(Mesh{{{0, 0, 0}}, {}}, fast_config()), PreconditionError);
    CHECK_THROWS_AS(run_pipeline(Mesh{{{0, 0, 0}}, {{0, 0, 1}}}, fast_config()), IndexRangeError);
}

TEST_CASE("worker count does not change the result") {
    const Mesh m = inject_deficiencies(fixtures::icosphere(2), full_spec()).mesh;
    PipelineConfig a = fast_config(9), b = fast_config(9);
    a.workers = 1;
    b.workers = 3;
    const PipelineResult ra = run_pipeline(m, a), rb = run_pipeline(m, b);
    CHECK(ra.mesh == rb.mesh);
    REQUIRE(ra.report.stages.size() == rb.report.stages.size());
    for (std::size_t i = 0; i < ra.report.stages.size(); ++i)
        CHECK(ra.report.stages[i].removed_or_flipped == rb.report.stages[i].removed_or_flipped);
}

TEST_CASE("audit counts") {
    const PipelineConfig config = fast_config();
    SUBCASE("clean cube") { CHECK(audit_deficiencies(fixtures::cube(), config) == AuditReport{}); }
    SUBCASE("injected items") {
        const InjectionResult inj = inject_deficiencies(fixtures::icosphere(2), full_spec());
        const AuditReport a = audit_deficiencies(inj.mesh, config);
        CHECK(a.duplicate_vertices == 4);
        CHECK(a.duplicate_faces == 3);
        CHECK(a.degenerate_faces == 3);
        CHECK(a.isolated_vertices == 5);
        CHECK(a.self_intersecting_pairs >= 2);
        CHECK(a.inner_faces >= 320);
    }
    SUBCASE("five isolated vertices in a cube") {
        InjectionSpec s;
        s.isolated_vertices = 5;
        const Mesh m = inject_deficiencies(fixtures::cube(), s).mesh;
        CHECK(m.vertex_count() == 13);
        CHECK(audit_deficiencies(m, config).isolated_vertices == 5);
    }
}

TEST_CASE("injection ground truth") {
    const Mesh sphere = fixtures::icosphere(2);
    const InjectionResult inj = inject_deficiencies(sphere, full_spec());
    const InjectionTruth& t = inj.truth;
    CHECK(t.duplicate_vertices.size() == 4);
    CHECK(t.duplicate_faces.size() == 3);
    CHECK(t.isolated_vertices.size() == 5);
    CHECK(t.degenerate_faces.size() == 3);
    CHECK(t.crossing_pairs.size() == 2);
    CHECK(t.flipped_faces.size() == 6);
    CHECK(t.inner_faces.size() == sphere.face_count());

    CHECK(oracle::isolated_vertices(inj.mesh) == t.isolated_vertices);
    CHECK(oracle::degenerate_faces(inj.mesh) == t.degenerate_faces);
    CHECK(oracle::duplicate_faces(inj.mesh) == t.duplicate_faces);
    CHECK(oracle::duplicate_vertices(inj.mesh) == t.duplicate_vertices);
    for (const auto& [a, b] : t.crossing_pairs)
        CHECK(classify_face_pair(inj.mesh, a, b).kind == TriTriKind::ProperSegment);
    for (Index f : t.flipped_faces) CHECK(inj.mesh.faces[f] == flipped(sphere.faces[f]));

    // The inner shell is classified inner by the voting.
    RaySamplingPlan p;
    p.seed = 2;
    p.rays_total = 20'000;
    InjectionSpec shell_only;
    shell_only.inner_shell = true;
    const InjectionResult shell = inject_deficiencies(sphere, shell_only);
    const InnerFaceResult r = remove_inner_faces(shell.mesh, p);
    CHECK(r.removed_faces == shell.truth.inner_faces);
}

TEST_CASE("zero spec leaves the mesh unchanged") {
    const Mesh cube = fixtures::cube();
    const InjectionResult r = inject_deficiencies(cube, InjectionSpec{});
    CHECK(r.mesh == cube);
}

TEST_CASE("injection rejects oversized requests") {
    InjectionSpec s;
    s.flipped_faces = 13;
    CHECK_THROWS_AS(inject_deficiencies(fixtures::cube(), s), PreconditionError);
    s = {};
    s.duplicate_vertices = 9;
    CHECK_THROWS_AS(inject_deficiencies(fixtures::cube(), s), PreconditionError);
}

TEST_CASE("slicing") {
    const Mesh nested = fixtures::nested_cubes();
    SUBCASE("nested cubes at z = 0") {
        const Mesh before = slice_mesh(nested, {0, 0, 0}, {0, 0, 1});
        // Bottom faces plus the lower-centroid triangles of each side, for both shells.
        std::size_t inner = 0, outer = 0;
        for (Index f = 0; f < before.faces.size(); ++f) {
            const auto [a, b, c] = before.corners(f);
            (std::max({norm(a), norm(b), norm(c)}) > 1.0 ? outer : inner)++;
            CHECK((a.z + b.z + c.z) / 3.0 < 0.0);
        }
        CHECK(inner > 0);
        CHECK(inner == outer);
        RaySamplingPlan p;
        p.seed = 1;
        const Mesh after = slice_mesh(remove_inner_faces(nested, p).mesh, {0, 0, 0}, {0, 0, 1});
        CHECK(after.face_count() == outer);
    }
    SUBCASE("plane beyond the box keeps everything") {
        CHECK(slice_mesh(nested, {0, 0, 5}, {0, 0, 1}) == nested);
    }
    SUBCASE("plane on the far side keeps nothing and still writes") {
        const Mesh empty = slice_mesh(nested, {0, 0, -5}, {0, 0, 1});
        CHECK(empty.faces.empty());
        CHECK(empty.vertices.empty());
        const auto path = std::filesystem::temp_directory_path() / "meshmend_test_empty_slice.off";
        slice_export(nested, {0, 0, -5}, {0, 0, 1}, path);
        CHECK(load_mesh(path).faces.empty());
        std::filesystem::remove(path);
    }
}

TEST_CASE("report JSON") {
    const PipelineResult r = run_pipeline(fixtures::nested_cubes(), fast_config());
    const nlohmann::json j = report_to_json(r.report);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == r.report.stages.size());
    for (const char* key : {"stage", "vertices_before", "vertices_after", "faces_before", "faces_after",
                            "removed_or_flipped", "ms"})
        CHECK(j[0].contains(key));
    const RepairReport back = report_from_json(j);
    CHECK(back.stages.size() == r.report.stages.size());
    CHECK(back.find("remove_inner")->removed_or_flipped == 12);
}

TEST_CASE("injection spec JSON") {
    const auto spec = injection_spec_from_json(nlohmann::json::parse(R"({"isolated_vertices": 3, "inner_shell": true, "seed": 9})"));
    CHECK(spec.isolated_vertices == 3);
    CHECK(spec.inner_shell);
    CHECK(spec.seed == 9);
    CHECK(spec.duplicate_faces == 0);
    CHECK_THROWS_AS(injection_spec_from_json(nlohmann::json::parse(R"({"isolated": 3})")), PreconditionError);
}

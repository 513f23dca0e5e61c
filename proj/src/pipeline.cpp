#include "meshmend/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <random>
#include <set>

#include "meshmend/error.hpp"
#include "meshmend/mesh_io.hpp"
#include "meshmend/parallel.hpp"
#include "meshmend/remesh.hpp"
#include "meshmend/simplify.hpp"

namespace meshmend {
namespace {

constexpr const char* kStageNames[kStageCount] = {
    "dedup",    "remove_degenerate",  "remove_isolated", "normalize",     "remesh",
    "dedup_after_remesh", "simplify", "correct_orientation", "remove_inner",
};

// Merges vertices within `tolerance`, then drops duplicate faces, faces whose
// corners merged together and vertices left unreferenced. Returns the number
// of vertices merged plus faces dropped.
std::size_t weld(Mesh& mesh, double tolerance) {
    std::size_t removed = 0;
    VertexPassResult merged = remove_duplicate_vertices(mesh, tolerance);
    removed += merged.removed_count();
    FacePassResult faces = remove_duplicate_faces(merged.mesh);
    removed += faces.removed_count();

    std::vector<bool> collapsed(faces.mesh.faces.size(), false);
    bool any = false;
    for (std::size_t f = 0; f < collapsed.size(); ++f) {
        const Face& t = faces.mesh.faces[f];
        collapsed[f] = t[0] == t[1] || t[1] == t[2] || t[0] == t[2];
        any = any || collapsed[f];
    }
    if (any) {
        FacePassResult kept = remove_faces(faces.mesh, collapsed);
        removed += kept.removed_count();
        VertexPassResult iso = remove_isolated_vertices(kept.mesh);
        mesh = std::move(iso.mesh);
    } else {
        mesh = std::move(faces.mesh);
    }
    return removed;
}

std::size_t count_proper_pairs(const Mesh& mesh, double eps, unsigned workers) {
    std::size_t n = 0;
    for (const auto& p : find_intersecting_pairs(mesh, eps, workers))
        if (p.result.kind == TriTriKind::ProperSegment) ++n;
    return n;
}

// Remesh, weld, and repeat while proper crossings remain.
std::size_t remesh_stage(Mesh& mesh, const PipelineConfig& config, RemeshSummary& summary) {
    RemeshOptions options;
    options.samples_per_segment = config.samples_per_segment;
    options.workers = config.workers;
    const double weld_tol = kRemeshWeldTolerance * std::max(1.0, bounding_box(mesh).diagonal());

    std::size_t replaced = 0;
    for (std::size_t pass = 1; pass <= kMaxRemeshPasses; ++pass) {
        RemeshResult r = remesh_self_intersections(mesh, options);
        summary.passes = pass;
        if (pass == 1) summary.coplanar_pairs = r.coplanar_pairs;
        summary.failed_faces += r.failed_faces.size();
        replaced += r.remeshed_face_count;
        if (r.remeshed_face_count == 0) {
            summary.residual_pairs = count_proper_pairs(mesh, options.eps, options.workers);
            break;
        }
        mesh = std::move(r.mesh);
        weld(mesh, weld_tol);
        summary.residual_pairs = count_proper_pairs(mesh, options.eps, options.workers);
        if (summary.residual_pairs == 0) break;
    }
    return replaced;
}

std::vector<Index> pick_distinct(std::mt19937_64& rng, std::vector<Index> candidates, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(k);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

std::vector<Index> iota_indices(std::size_t n) {
    std::vector<Index> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Index>(i);
    return v;
}

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

const char* stage_name(Stage stage) { return kStageNames[static_cast<std::size_t>(stage)]; }

std::optional<Stage> stage_from_name(std::string_view name) {
    for (Stage s : kAllStages)
        if (name == stage_name(s)) return s;
    return std::nullopt;
}

PipelineResult run_pipeline(const Mesh& input, const PipelineConfig& config) {
    if (input.faces.empty()) throw PreconditionError("pipeline input has no faces");
    validate_indices(input);
    config.rays.validate();

    PipelineResult out;
    Mesh mesh = input;
    RaySamplingPlan plan = config.rays;
    plan.workers = config.workers;

    for (Stage stage : kAllStages) {
        if (!config.stage_enabled(stage)) continue;
        if (stage == Stage::Simplify && config.target_vertices == 0) continue;

        StageEntry entry;
        entry.stage = stage_name(stage);
        entry.vertices_before = mesh.vertex_count();
        entry.faces_before = mesh.face_count();
        if (stage == Stage::RemoveInner) out.before_inner = mesh;
        const auto start = std::chrono::steady_clock::now();
        try {
            Mesh next;
            std::size_t count = 0;
            switch (stage) {
                case Stage::Dedup: {
                    VertexPassResult v = remove_duplicate_vertices(mesh, config.dedup_tolerance);
                    FacePassResult f = remove_duplicate_faces(v.mesh);
                    count = v.removed_count() + f.removed_count();
                    next = std::move(f.mesh);
                    break;
                }
                case Stage::RemoveDegenerate: {
                    FacePassResult f = remove_degenerate_faces(mesh, config.degeneracy_epsilon);
                    count = f.removed_count();
                    next = std::move(f.mesh);
                    break;
                }
                case Stage::RemoveIsolated: {
                    VertexPassResult v = remove_isolated_vertices(mesh);
                    count = v.removed_count();
                    next = std::move(v.mesh);
                    break;
                }
                case Stage::Normalize:
                    next = normalize_unit_sphere(mesh);
                    break;
                case Stage::Remesh:
                    next = mesh;
                    count = remesh_stage(next, config, out.remesh);
                    break;
                case Stage::DedupAfterRemesh: {
                    next = mesh;
                    const double tol = std::max(config.dedup_tolerance,
                                                kRemeshWeldTolerance * std::max(1.0, bounding_box(mesh).diagonal()));
                    count = weld(next, tol);
                    break;
                }
                case Stage::Simplify: {
                    SimplifyResult s = simplify(mesh, config.target_vertices);
                    count = s.collapses;
                    next = std::move(s.mesh);
                    break;
                }
                case Stage::CorrectOrientation: {
                    OrientationResult o = correct_orientation(mesh, plan);
                    count = o.flipped_count();
                    next = std::move(o.mesh);
                    break;
                }
                case Stage::RemoveInner: {
                    InnerFaceResult r = remove_inner_faces(mesh, plan);
                    count = r.removed_count();
                    next = std::move(r.mesh);
                    break;
                }
            }
            mesh = std::move(next);
            entry.removed_or_flipped = count;
        } catch (const std::exception& e) {
            out.partial_failure = true;
            out.failed_stage = entry.stage;
            out.error = e.what();
            if (stage == Stage::RemoveInner) out.before_inner.reset();
            break;
        }
        entry.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        entry.vertices_after = mesh.vertex_count();
        entry.faces_after = mesh.face_count();
        out.report.stages.push_back(std::move(entry));
    }
    out.mesh = std::move(mesh);
    return out;
}

AuditReport audit_deficiencies(const Mesh& mesh, const PipelineConfig& config) {
    validate_indices(mesh);
    AuditReport a;
    a.duplicate_vertices = remove_duplicate_vertices(mesh, config.dedup_tolerance).removed_count();
    a.duplicate_faces = remove_duplicate_faces(mesh).removed_count();
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto [p, q, r] = mesh.corners(static_cast<Index>(f));
        if (is_degenerate_face(p, q, r, config.degeneracy_epsilon)) ++a.degenerate_faces;
    }
    a.isolated_vertices = remove_isolated_vertices(mesh).removed_count();
    if (mesh.faces.empty()) return a;

    a.self_intersecting_pairs = find_intersecting_pairs(mesh, kTriTriEpsilon, config.workers).size();

    RaySamplingPlan plan = config.rays;
    plan.workers = config.workers;
    const AabbTree tree(mesh);
    const auto tallies = tally_front(mesh, tree, plan);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (!(squared_norm(mesh.face_normal(static_cast<Index>(f))) > 0.0)) continue;
        if (is_inner(tallies[f], plan.inner_threshold)) ++a.inner_faces;
    }
    return a;
}

InjectionResult inject_deficiencies(const Mesh& mesh, const InjectionSpec& spec) {
    validate_indices(mesh);
    const std::size_t nv = mesh.vertex_count();
    const std::size_t nf = mesh.face_count();
    const bool needs_geometry = spec.duplicate_vertices || spec.duplicate_faces || spec.isolated_vertices ||
                                spec.degenerate_faces || spec.crossing_pairs || spec.flipped_faces ||
                                spec.inner_shell;
    InjectionResult out;
    out.mesh = mesh;
    if (!needs_geometry) return out;
    if (nf == 0) throw PreconditionError("injection needs a mesh with faces");
    if (spec.flipped_faces > nf) throw PreconditionError("more flipped faces requested than the mesh has");
    if (spec.duplicate_faces > nf) throw PreconditionError("more duplicate faces requested than the mesh has");
    if (spec.degenerate_faces > nf) throw PreconditionError("more degenerate faces requested than the mesh has");
    if (spec.inner_shell && !(spec.inner_shell_scale > 0.0 && spec.inner_shell_scale < 1.0))
        throw PreconditionError("inner_shell_scale must lie in (0, 1)");

    std::mt19937_64 rng(spec.seed);
    Mesh& m = out.mesh;
    InjectionTruth& truth = out.truth;
    const Aabb box = bounding_box(mesh);
    const Vec3 center = box.center();

    // Faces per vertex, for re-pointing duplicated vertices.
    std::vector<std::vector<Index>> vertex_faces(nv);
    for (std::size_t f = 0; f < nf; ++f)
        for (Index v : mesh.faces[f]) vertex_faces[v].push_back(static_cast<Index>(f));

    for (Index f : pick_distinct(rng, iota_indices(nf), spec.flipped_faces)) {
        m.faces[f] = flipped(m.faces[f]);
        truth.flipped_faces.push_back(f);
    }

    if (spec.duplicate_vertices > 0) {
        std::vector<Index> shared;
        for (std::size_t v = 0; v < nv; ++v)
            if (vertex_faces[v].size() >= 2) shared.push_back(static_cast<Index>(v));
        if (spec.duplicate_vertices > shared.size())
            throw PreconditionError("more duplicate vertices requested than the mesh has shared vertices");
        for (Index v : pick_distinct(rng, shared, spec.duplicate_vertices)) {
            const Index copy = static_cast<Index>(m.vertices.size());
            m.vertices.push_back(m.vertices[v]);
            const auto& incident = vertex_faces[v];
            const Index f = incident[rng() % incident.size()];
            for (Index& c : m.faces[f])
                if (c == v) c = copy;
            truth.duplicate_vertices.push_back(copy);
        }
    }

    for (Index f : pick_distinct(rng, iota_indices(nf), spec.duplicate_faces)) {
        const Face& t = m.faces[f];
        truth.duplicate_faces.push_back(static_cast<Index>(m.faces.size()));
        m.faces.push_back({t[1], t[2], t[0]});
    }

    if (spec.degenerate_faces > 0) {
        std::set<std::pair<Index, Index>> used_edges;
        for (Index f : pick_distinct(rng, iota_indices(nf), spec.degenerate_faces)) {
            const Face t = mesh.faces[f];
            for (int k = 0; k < 3; ++k) {
                const Index a = t[k], b = t[(k + 1) % 3];
                if (!used_edges.insert({std::min(a, b), std::max(a, b)}).second) continue;
                const Index mid = static_cast<Index>(m.vertices.size());
                m.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]) * 0.5);
                truth.degenerate_faces.push_back(static_cast<Index>(m.faces.size()));
                m.faces.push_back({a, mid, b});
                break;
            }
        }
        if (truth.degenerate_faces.size() < spec.degenerate_faces)
            throw PreconditionError("not enough distinct edges for the degenerate faces requested");
    }

    for (std::size_t i = 0; i < spec.isolated_vertices; ++i) {
        const Vec3 e = box.extent();
        truth.isolated_vertices.push_back(static_cast<Index>(m.vertices.size()));
        m.vertices.push_back(box.lo + Vec3{e.x * unit_double(rng), e.y * unit_double(rng), e.z * unit_double(rng)});
    }

    if (spec.crossing_pairs > 0) {
        const Vec3 e = box.extent();
        const double r = 0.5 * std::min({e.x, e.y, e.z});
        if (!(r > 0.0)) throw PreconditionError("crossing pairs need a mesh with volume");
        const double spacing = 0.3 * r / static_cast<double>(spec.crossing_pairs);
        const double s = 0.35 * spacing;
        for (std::size_t i = 0; i < spec.crossing_pairs; ++i) {
            const double x = center.x + (static_cast<double>(i) - 0.5 * static_cast<double>(spec.crossing_pairs - 1)) * spacing;
            const double y = center.y, z = center.z;
            const Index base = static_cast<Index>(m.vertices.size());
            // A horizontal triangle pierced by a vertical one.
            m.vertices.push_back({x - s, y - s, z});
            m.vertices.push_back({x + s, y - s, z});
            m.vertices.push_back({x, y + s, z});
            m.vertices.push_back({x, y - 0.5 * s, z - s});
            m.vertices.push_back({x, y + 0.5 * s, z - s});
            m.vertices.push_back({x, y, z + s});
            const Index first = static_cast<Index>(m.faces.size());
            m.faces.push_back({base, base + 1, base + 2});
            m.faces.push_back({base + 3, base + 4, base + 5});
            truth.crossing_pairs.emplace_back(first, first + 1);
        }
    }

    if (spec.inner_shell) {
        const Index base = static_cast<Index>(m.vertices.size());
        for (const Vec3& p : mesh.vertices) m.vertices.push_back(center + (p - center) * spec.inner_shell_scale);
        for (const Face& t : mesh.faces) {
            truth.inner_faces.push_back(static_cast<Index>(m.faces.size()));
            m.faces.push_back({base + t[0], base + t[1], base + t[2]});
        }
    }
    return out;
}

Mesh slice_mesh(const Mesh& mesh, const Vec3& point, const Vec3& normal) {
    validate_indices(mesh);
    std::vector<bool> drop(mesh.faces.size(), false);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto [a, b, c] = mesh.corners(static_cast<Index>(f));
        drop[f] = !(dot((a + b + c) / 3.0 - point, normal) < 0.0);
    }
    return remove_isolated_vertices(remove_faces(mesh, drop).mesh).mesh;
}

void slice_export(const Mesh& mesh, const Vec3& point, const Vec3& normal, const std::filesystem::path& path) {
    save_mesh(slice_mesh(mesh, point, normal), path);
}

}  // namespace meshmend

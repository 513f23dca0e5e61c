#include "meshmend/remesh.hpp"

#include <algorithm>
#include <cmath>

#include "meshmend/error.hpp"
#include "meshmend/parallel.hpp"
#include "meshmend/triangulate2d.hpp"

namespace meshmend {
namespace {

bool has_zero_area(const Mesh& mesh, Index f) {
    return !(squared_norm(mesh.face_normal(f)) > 0.0);
}

struct FacePatch {
    bool replaced = false;
    bool failed = false;
    std::vector<Vec3> new_vertices;
    // Corners index the parent face's vertices (0..2) or new_vertices (3 + k).
    std::vector<std::array<int, 3>> triangles;
};

// Retriangulates one face against its intersection segments.
FacePatch remesh_face(const Mesh& mesh, Index face, const std::vector<Segment3>& segments,
                      std::size_t samples, double tol) {
    const auto [p0, p1, p2] = mesh.corners(face);
    const Vec3 u = normalized(p1 - p0);
    const Vec3 n = normalized(cross(p1 - p0, p2 - p0));
    const Vec3 w = cross(n, u);
    auto to2d = [&](const Vec3& q) { return Point2{dot(q - p0, u), dot(q - p0, w)}; };
    const std::array<Point2, 3> outer{to2d(p0), to2d(p1), to2d(p2)};

    std::vector<Point2> points;
    std::vector<std::pair<int, int>> constraints;
    for (const Segment3& s : segments) {
        const int first = 3 + static_cast<int>(points.size());
        for (std::size_t k = 0; k < samples; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
            points.push_back(to2d(lerp(s.a, s.b, t)));
        }
        for (std::size_t k = 0; k + 1 < samples; ++k)
            constraints.emplace_back(first + static_cast<int>(k), first + static_cast<int>(k) + 1);
    }

    FacePatch patch;
    ConstrainedTriangulation ct;
    try {
        ct = triangulate_constrained(outer, points, constraints, tol);
    } catch (const TriangulationError&) {
        patch.failed = true;
        return patch;
    }
    if (ct.triangles.size() <= 1) return patch;

    // Lift new points back into the parent through clamped barycentrics.
    const double area = orient2d(outer[0], outer[1], outer[2]);
    std::vector<int> local(ct.points.size(), -1);
    for (int i = 0; i < 3; ++i) local[i] = i;
    for (std::size_t i = 3; i < ct.points.size(); ++i) {
        const Point2& q = ct.points[i];
        std::array<double, 3> b{std::max(0.0, orient2d(outer[1], outer[2], q) / area),
                                std::max(0.0, orient2d(outer[2], outer[0], q) / area),
                                std::max(0.0, orient2d(outer[0], outer[1], q) / area)};
        const double sum = b[0] + b[1] + b[2];
        local[i] = 3 + static_cast<int>(patch.new_vertices.size());
        patch.new_vertices.push_back((p0 * b[0] + p1 * b[1] + p2 * b[2]) / sum);
    }

    // Sanity: orientation and area must match the parent in 3D as well.
    const Vec3 parent_normal = cross(p1 - p0, p2 - p0);
    const std::array<Vec3, 3> corner{p0, p1, p2};
    auto position = [&](int id) { return id < 3 ? corner[id] : patch.new_vertices[id - 3]; };
    double area_sum = 0.0;
    for (const auto& t : ct.triangles) {
        const std::array<int, 3> tri{local[t[0]], local[t[1]], local[t[2]]};
        const Vec3 nt = cross(position(tri[1]) - position(tri[0]), position(tri[2]) - position(tri[0]));
        if (!(dot(nt, parent_normal) > 0.0)) {
            patch = {};
            patch.failed = true;
            return patch;
        }
        area_sum += norm(nt);
        patch.triangles.push_back(tri);
    }
    const double parent_area = norm(parent_normal);
    if (std::abs(area_sum - parent_area) > 1e-8 * parent_area) {
        patch = {};
        patch.failed = true;
        return patch;
    }
    patch.replaced = true;
    return patch;
}

}  // namespace

std::vector<IntersectingPair> find_intersecting_pairs(const Mesh& mesh, double eps, unsigned workers) {
    if (mesh.faces.empty()) return {};
    const AabbTree tree(mesh);
    const double margin = eps * std::max(bounding_box(mesh).diagonal(), 1e-300);

    std::vector<std::vector<IntersectingPair>> per_face(mesh.faces.size());
    parallel_for(mesh.faces.size(), workers, [&](std::size_t i) {
        const Index fi = static_cast<Index>(i);
        if (has_zero_area(mesh, fi)) return;
        const IndexedTriangle ti = indexed_triangle(mesh, fi);
        std::vector<Index> candidates;
        tree.for_each_overlap(tree.face_box(fi).inflated(margin), [&](Index fj) {
            if (fj > fi) candidates.push_back(fj);
        });
        std::sort(candidates.begin(), candidates.end());
        for (Index fj : candidates) {
            if (has_zero_area(mesh, fj)) continue;
            TriTriResult r = tri_tri_intersect(ti, indexed_triangle(mesh, fj), eps);
            if (r.kind == TriTriKind::ProperSegment || r.kind == TriTriKind::Coplanar)
                per_face[i].push_back({fi, fj, std::move(r)});
        }
    });

    std::vector<IntersectingPair> out;
    for (auto& v : per_face)
        for (auto& p : v) out.push_back(std::move(p));
    return out;
}

std::vector<FacePair> detect_self_intersections(const Mesh& mesh, double eps, unsigned workers) {
    std::vector<FacePair> out;
    for (const auto& p : find_intersecting_pairs(mesh, eps, workers)) out.emplace_back(p.first, p.second);
    return out;
}

RemeshResult remesh_self_intersections(const Mesh& mesh, const RemeshOptions& options) {
    if (options.samples_per_segment < 2) throw PreconditionError("samples_per_segment must be at least 2");

    RemeshResult out;
    const auto pairs = find_intersecting_pairs(mesh, options.eps, options.workers);

    std::vector<std::vector<Segment3>> segments(mesh.faces.size());
    std::vector<Index> involved;
    for (const auto& p : pairs) {
        if (p.result.kind == TriTriKind::Coplanar) {
            ++out.coplanar_pairs;
            continue;
        }
        segments[p.first].push_back(*p.result.segment);
        segments[p.second].push_back(*p.result.segment);
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
        if (!segments[f].empty()) involved.push_back(static_cast<Index>(f));

    const double tol = options.snap_tolerance * std::max(1.0, bounding_box(mesh).diagonal());
    std::vector<FacePatch> patches(involved.size());
    parallel_for(involved.size(), options.workers, [&](std::size_t k) {
        const Index f = involved[k];
        patches[k] = remesh_face(mesh, f, segments[f], options.samples_per_segment, tol);
    }, 1);

    out.mesh.vertices = mesh.vertices;
    out.mesh.faces.reserve(mesh.faces.size() + 4 * involved.size());
    out.parent_face.reserve(out.mesh.faces.capacity());
    std::size_t next_patch = 0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& parent = mesh.faces[f];
        const FacePatch* patch = nullptr;
        if (next_patch < involved.size() && involved[next_patch] == f) patch = &patches[next_patch++];

        if (patch == nullptr || !patch->replaced) {
            if (patch != nullptr && patch->failed) out.failed_faces.push_back(static_cast<Index>(f));
            out.mesh.faces.push_back(parent);
            out.parent_face.push_back(static_cast<Index>(f));
            continue;
        }
        const Index base = static_cast<Index>(out.mesh.vertices.size());
        out.mesh.vertices.insert(out.mesh.vertices.end(), patch->new_vertices.begin(), patch->new_vertices.end());
        auto global = [&](int id) { return id < 3 ? parent[id] : base + static_cast<Index>(id - 3); };
        for (const auto& t : patch->triangles) {
            out.mesh.faces.push_back({global(t[0]), global(t[1]), global(t[2])});
            out.parent_face.push_back(static_cast<Index>(f));
        }
        ++out.remeshed_face_count;
    }
    return out;
}

}  // namespace meshmend

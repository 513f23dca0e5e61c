#include <algorithm>
#include <cmath>

#include "meshmend/error.hpp"
#include "meshmend/spatial.hpp"

namespace meshmend {
namespace {

int shared_index_count(const IndexedTriangle& a, const IndexedTriangle& b) {
    int shared = 0;
    for (Index i : a.v) {
        if (i == kInvalidIndex) continue;
        if (std::find(b.v.begin(), b.v.end(), i) != b.v.end()) ++shared;
    }
    return shared;
}

struct Point2 {
    double x, y;
};

// Positive-area overlap of two coplanar triangles via separating axes.
// Overlaps thinner than tol along any edge normal count as separated.
bool coplanar_overlap(const IndexedTriangle& a, const IndexedTriangle& b, const Vec3& normal, double tol) {
    // Drop the dominant normal axis.
    const Vec3 n{std::abs(normal.x), std::abs(normal.y), std::abs(normal.z)};
    const int drop = (n.x >= n.y && n.x >= n.z) ? 0 : (n.y >= n.z ? 1 : 2);
    const int u = (drop + 1) % 3;
    const int w = (drop + 2) % 3;
    std::array<Point2, 3> pa, pb;
    for (int i = 0; i < 3; ++i) {
        pa[i] = {a.p[i][u], a.p[i][w]};
        pb[i] = {b.p[i][u], b.p[i][w]};
    }

    auto separated_along_edges = [tol](const std::array<Point2, 3>& s, const std::array<Point2, 3>& t) {
        for (int i = 0; i < 3; ++i) {
            const Point2& p0 = s[i];
            const Point2& p1 = s[(i + 1) % 3];
            Point2 axis{-(p1.y - p0.y), p1.x - p0.x};
            const double len = std::hypot(axis.x, axis.y);
            if (len == 0.0) continue;
            axis = {axis.x / len, axis.y / len};
            double s_lo = INFINITY, s_hi = -INFINITY, t_lo = INFINITY, t_hi = -INFINITY;
            for (int k = 0; k < 3; ++k) {
                const double ps = s[k].x * axis.x + s[k].y * axis.y;
                const double pt = t[k].x * axis.x + t[k].y * axis.y;
                s_lo = std::min(s_lo, ps);
                s_hi = std::max(s_hi, ps);
                t_lo = std::min(t_lo, pt);
                t_hi = std::max(t_hi, pt);
            }
            if (std::min(s_hi, t_hi) - std::max(s_lo, t_lo) <= tol) return true;
        }
        return false;
    };
    // Projection scales lengths by at most 1/|n_dominant| >= 1; tol stays conservative.
    return !separated_along_edges(pa, pb) && !separated_along_edges(pb, pa);
}

// Portion of triangle `t` on the plane with signed vertex distances `d`
// (already snapped to zero within tolerance). Returns the extreme points
// along `dir`.
bool plane_section(const IndexedTriangle& t, const std::array<double, 3>& d, const Vec3& dir,
                   Vec3& lo_point, double& lo, Vec3& hi_point, double& hi) {
    lo = INFINITY;
    hi = -INFINITY;
    bool any = false;
    auto add = [&](const Vec3& p) {
        const double s = dot(dir, p);
        if (s < lo) { lo = s; lo_point = p; }
        if (s > hi) { hi = s; hi_point = p; }
        any = true;
    };
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        if (d[i] == 0.0) add(t.p[i]);
        if ((d[i] < 0.0 && d[j] > 0.0) || (d[i] > 0.0 && d[j] < 0.0))
            add(t.p[i] + (t.p[j] - t.p[i]) * (d[i] / (d[i] - d[j])));
    }
    return any;
}

std::array<double, 3> plane_distances(const IndexedTriangle& t, const Vec3& unit_normal,
                                      const Vec3& plane_point, double tol) {
    std::array<double, 3> d{};
    for (int i = 0; i < 3; ++i) {
        d[i] = dot(unit_normal, t.p[i] - plane_point);
        if (std::abs(d[i]) <= tol) d[i] = 0.0;
    }
    return d;
}

bool all_strictly_same_side(const std::array<double, 3>& d) {
    return (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0);
}

}  // namespace

const char* to_string(TriTriKind kind) {
    switch (kind) {
        case TriTriKind::Disjoint: return "Disjoint";
        case TriTriKind::SharedVertexOnly: return "SharedVertexOnly";
        case TriTriKind::SharedEdge: return "SharedEdge";
        case TriTriKind::ProperSegment: return "ProperSegment";
        case TriTriKind::Coplanar: return "Coplanar";
    }
    return "?";
}

IndexedTriangle indexed_triangle(const Mesh& mesh, Index face) {
    const Face& f = mesh.faces[face];
    return {{mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]}, {f[0], f[1], f[2]}};
}

TriTriResult tri_tri_intersect(const IndexedTriangle& a, const IndexedTriangle& b, double eps) {
    const Vec3 raw_na = cross(a.p[1] - a.p[0], a.p[2] - a.p[0]);
    const Vec3 raw_nb = cross(b.p[1] - b.p[0], b.p[2] - b.p[0]);
    if (!(squared_norm(raw_na) > 0.0) || !(squared_norm(raw_nb) > 0.0))
        throw DegenerateGeometryError("triangle-triangle test on a degenerate triangle");

    const int shared = shared_index_count(a, b);
    if (shared >= 2) return {TriTriKind::SharedEdge, std::nullopt};
    if (shared == 1) return {TriTriKind::SharedVertexOnly, std::nullopt};

    Aabb box = bounding_box(a.p[0], a.p[1], a.p[2]);
    box.expand(bounding_box(b.p[0], b.p[1], b.p[2]));
    const double tol = eps * std::max(box.diagonal(), 1e-300);

    const Vec3 na = normalized(raw_na);
    const Vec3 nb = normalized(raw_nb);

    const auto da_on_b = plane_distances(a, nb, b.p[0], tol);
    if (all_strictly_same_side(da_on_b)) return {TriTriKind::Disjoint, std::nullopt};
    const auto db_on_a = plane_distances(b, na, a.p[0], tol);
    if (all_strictly_same_side(db_on_a)) return {TriTriKind::Disjoint, std::nullopt};

    const bool a_in_b_plane = da_on_b[0] == 0.0 && da_on_b[1] == 0.0 && da_on_b[2] == 0.0;
    const bool b_in_a_plane = db_on_a[0] == 0.0 && db_on_a[1] == 0.0 && db_on_a[2] == 0.0;
    const Vec3 line = cross(na, nb);
    if (a_in_b_plane || b_in_a_plane || norm(line) < 1e-14) {
        return {coplanar_overlap(a, b, na, tol) ? TriTriKind::Coplanar : TriTriKind::Disjoint,
                std::nullopt};
    }
    const Vec3 dir = normalized(line);

    Vec3 a_lo_p, a_hi_p, b_lo_p, b_hi_p;
    double a_lo, a_hi, b_lo, b_hi;
    if (!plane_section(a, da_on_b, dir, a_lo_p, a_lo, a_hi_p, a_hi) ||
        !plane_section(b, db_on_a, dir, b_lo_p, b_lo, b_hi_p, b_hi))
        return {TriTriKind::Disjoint, std::nullopt};

    const double lo = std::max(a_lo, b_lo);
    const double hi = std::min(a_hi, b_hi);
    if (hi - lo <= tol) return {TriTriKind::Disjoint, std::nullopt};

    Segment3 seg;
    seg.a = a_lo >= b_lo ? a_lo_p : b_lo_p;
    seg.b = a_hi <= b_hi ? a_hi_p : b_hi_p;
    return {TriTriKind::ProperSegment, seg};
}

}  // namespace meshmend

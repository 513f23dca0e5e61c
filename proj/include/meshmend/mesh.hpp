// Indexed triangle mesh: a vertex position array plus an array of index
// triples. Indices are zero-based. Edges of face (p1, p2, p3) are
//   e1 = v[p2] - v[p1],  e2 = v[p3] - v[p2],  e3 = v[p1] - v[p3].
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "meshmend/vec3.hpp"

namespace meshmend {

using Index = std::uint32_t;
using Face = std::array<Index, 3>;

inline constexpr Index kInvalidIndex = std::numeric_limits<Index>::max();

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }

    void expand(const Vec3& p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }

    void expand(const Aabb& b) {
        if (b.empty()) return;
        expand(b.lo);
        expand(b.hi);
    }

    Aabb inflated(double margin) const {
        return {lo - Vec3{margin, margin, margin}, hi + Vec3{margin, margin, margin}};
    }

    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 extent() const { return hi - lo; }
    double diagonal() const { return empty() ? 0.0 : norm(hi - lo); }

    int longest_axis() const {
        const Vec3 e = extent();
        if (e.x >= e.y && e.x >= e.z) return 0;
        return e.y >= e.z ? 1 : 2;
    }

    // Closed-interval overlap: touching boxes overlap.
    bool overlaps(const Aabb& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y &&
               lo.z <= o.hi.z && o.lo.z <= hi.z;
    }

    bool contains(const Aabb& o) const {
        return lo.x <= o.lo.x && lo.y <= o.lo.y && lo.z <= o.lo.z && hi.x >= o.hi.x &&
               hi.y >= o.hi.y && hi.z >= o.hi.z;
    }

    bool contains(const Vec3& p) const {
        return lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y && lo.z <= p.z && p.z <= hi.z;
    }

    friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }
    bool empty() const { return faces.empty(); }

    std::array<Vec3, 3> corners(std::size_t face) const {
        const Face& f = faces[face];
        return {vertices[f[0]], vertices[f[1]], vertices[f[2]]};
    }

    // Unnormalized normal (e1 x e2); its length is twice the face area.
    Vec3 face_normal(std::size_t face) const;

    friend bool operator==(const Mesh&, const Mesh&) = default;
};

// Throws IndexRangeError if any face index is out of range.
void validate_indices(const Mesh& mesh);

Aabb bounding_box(const Mesh& mesh);
Aabb bounding_box(const Vec3& a, const Vec3& b, const Vec3& c);

struct FaceAreas {
    std::vector<double> areas;
    double total = 0.0;
};

// Per-face area |(v2-v1) x (v3-v1)| / 2 and the sum over all faces.
FaceAreas compute_face_areas(const Mesh& mesh);

// Translates the bounding-box center to the origin and scales uniformly so
// the farthest vertex has norm 1. Throws DegenerateGeometryError when every
// vertex coincides, PreconditionError on an empty vertex list.
Mesh normalize_unit_sphere(Mesh mesh);

// Signed enclosed volume, sum of v1 . (v2 x v3) / 6. Positive for a closed,
// outward-wound surface.
double signed_volume(const Mesh& mesh);

// Reverses winding: (p1, p2, p3) -> (p1, p3, p2).
constexpr Face flipped(const Face& f) { return {f[0], f[2], f[1]}; }

}  // namespace meshmend

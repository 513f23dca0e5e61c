// Spatial queries over a mesh: an AABB tree over faces, ray casting, and
// triangle-triangle intersection classification.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "meshmend/mesh.hpp"

namespace meshmend {

// Bounding-volume hierarchy over the faces of one mesh snapshot. Built by
// median split of face centroids along the longest axis; leaves hold up to
// kLeafSize faces. Immutable after construction and safe to query from
// several threads at once. Rebuild after the mesh changes.
class AabbTree {
public:
    static constexpr std::size_t kLeafSize = 4;

    struct Node {
        Aabb box;
        Index left = kInvalidIndex;  // child node indices; unused for leaves
        Index right = kInvalidIndex;
        Index first = 0;  // range into face_order() for leaves
        Index count = 0;
        bool is_leaf() const { return count > 0; }
    };

    // Throws PreconditionError if the mesh has no faces.
    explicit AabbTree(const Mesh& mesh);

    std::size_t face_count() const { return face_boxes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& root() const { return nodes_.front(); }
    const Aabb& root_box() const { return nodes_.front().box; }
    const Aabb& face_box(Index face) const { return face_boxes_[face]; }
    std::span<const Index> leaf_faces(const Node& leaf) const {
        return {face_order_.data() + leaf.first, leaf.count};
    }

    // Faces whose bounding box overlaps `box` (closed intervals), in
    // traversal order.
    std::vector<Index> query(const Aabb& box) const;

    template <typename Visitor>
    void for_each_overlap(const Aabb& box, Visitor&& visit) const {
        Index stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!node.box.overlaps(box)) continue;
            if (node.is_leaf()) {
                for (Index f : leaf_faces(node))
                    if (face_boxes_[f].overlaps(box)) visit(f);
            } else {
                stack[top++] = node.left;
                stack[top++] = node.right;
            }
        }
    }

private:
    Index build(Index first, Index count, const std::vector<Vec3>& centroids, int depth);

    std::vector<Node> nodes_;
    std::vector<Index> face_order_;
    std::vector<Aabb> face_boxes_;
};

AabbTree build_aabb_tree(const Mesh& mesh);

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
};

struct RayHit {
    Index face = kInvalidIndex;
    double t = 0.0;
    Vec3 point;
};

// Hits whose parameters differ by less than this are ties, resolved by lowest face index.
inline constexpr double kRayTieEpsilon = 1e-12;
inline constexpr double kDefaultRayTMin = 1e-6;

// Moller-Trumbore. Hits on edges and vertices count (a small barycentric
// slack is allowed). Rays parallel to the triangle plane miss. Returns the
// ray parameter of the hit without any t_min filtering.
std::optional<double> intersect_ray_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c);

// Nearest hit with t >= t_min on any face other than exclude_face
// (kInvalidIndex excludes nothing).
std::optional<RayHit> ray_first_hit(const AabbTree& tree, const Mesh& mesh, const Ray& ray,
                                    Index exclude_face = kInvalidIndex,
                                    double t_min = kDefaultRayTMin);

// True iff the ray reaches infinity, i.e. hits no face other than
// exclude_face at t >= t_min.
bool ray_escapes(const AabbTree& tree, const Mesh& mesh, const Ray& ray,
                 Index exclude_face = kInvalidIndex, double t_min = kDefaultRayTMin);

// --- triangle / triangle ---------------------------------------------------

enum class TriTriKind { Disjoint, SharedVertexOnly, SharedEdge, ProperSegment, Coplanar };

const char* to_string(TriTriKind kind);

struct Segment3 {
    Vec3 a;
    Vec3 b;
};

struct TriTriResult {
    TriTriKind kind = TriTriKind::Disjoint;
    std::optional<Segment3> segment;  // set for ProperSegment only
};

// Triangle with the mesh vertex indices of its corners. Corners with equal
// (valid) indices are considered the same mesh vertex.
struct IndexedTriangle {
    std::array<Vec3, 3> p;
    std::array<Index, 3> v{kInvalidIndex, kInvalidIndex, kInvalidIndex};
};

inline constexpr double kTriTriEpsilon = 1e-10;

// Index-level adjacency is checked first: two shared indices give
// SharedEdge, one gives SharedVertexOnly. Otherwise the triangles are
// classified geometrically with tolerance eps * (bounding size of the pair).
// A contact that is a single point is Disjoint; only overlaps of positive
// length (ProperSegment) or positive area (Coplanar) count as intersections.
// Throws DegenerateGeometryError if either triangle has no area.
TriTriResult tri_tri_intersect(const IndexedTriangle& a, const IndexedTriangle& b,
                               double eps = kTriTriEpsilon);

IndexedTriangle indexed_triangle(const Mesh& mesh, Index face);

inline TriTriResult classify_face_pair(const Mesh& mesh, Index fa, Index fb,
                                       double eps = kTriTriEpsilon) {
    return tri_tri_intersect(indexed_triangle(mesh, fa), indexed_triangle(mesh, fb), eps);
}

}  // namespace meshmend

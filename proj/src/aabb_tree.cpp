#include <algorithm>
#include <cmath>
#include <limits>

#include "meshmend/error.hpp"
#include "meshmend/spatial.hpp"

namespace meshmend {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Slab test against the box grown by a small margin, so hits the triangle
// test accepts through its barycentric slack are never culled. Returns false
// when the ray misses or the box lies entirely outside [t_lo, t_hi].
bool ray_box(const Ray& ray, const Aabb& box, double t_lo, double t_hi, double& t_entry) {
    const Vec3 e = box.extent();
    const double margin = 1e-9 * (1.0 + std::max({e.x, e.y, e.z}));
    for (int axis = 0; axis < 3; ++axis) {
        const double o = ray.origin[axis];
        const double d = ray.direction[axis];
        const double lo = box.lo[axis] - margin;
        const double hi = box.hi[axis] + margin;
        if (d == 0.0) {
            if (o < lo || o > hi) return false;
            continue;
        }
        const double inv = 1.0 / d;
        double t0 = (lo - o) * inv;
        double t1 = (hi - o) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_lo = std::max(t_lo, t0);
        t_hi = std::min(t_hi, t1);
        if (t_lo > t_hi) return false;
    }
    t_entry = t_lo;
    return true;
}

}  // namespace

AabbTree::AabbTree(const Mesh& mesh) {
    if (mesh.faces.empty()) throw PreconditionError("cannot build an AABB tree over an empty mesh");
    validate_indices(mesh);

    const std::size_t n = mesh.faces.size();
    face_boxes_.reserve(n);
    std::vector<Vec3> centroids;
    centroids.reserve(n);
    for (std::size_t f = 0; f < n; ++f) {
        const auto [a, b, c] = mesh.corners(f);
        face_boxes_.push_back(bounding_box(a, b, c));
        centroids.push_back((a + b + c) / 3.0);
    }
    face_order_.resize(n);
    for (std::size_t f = 0; f < n; ++f) face_order_[f] = static_cast<Index>(f);

    nodes_.reserve(2 * (n / kLeafSize + 1));
    build(0, static_cast<Index>(n), centroids, 0);
}

Index AabbTree::build(Index first, Index count, const std::vector<Vec3>& centroids, int depth) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.emplace_back();

    Aabb box;
    Aabb centroid_box;
    for (Index k = first; k < first + count; ++k) {
        box.expand(face_boxes_[face_order_[k]]);
        centroid_box.expand(centroids[face_order_[k]]);
    }
    nodes_[id].box = box;

    if (count <= kLeafSize || depth >= 60) {
        nodes_[id].first = first;
        nodes_[id].count = count;
        return id;
    }

    // Total order (centroid coordinate, face index) keeps the split deterministic.
    const int axis = centroid_box.longest_axis();
    const Index half = count / 2;
    auto begin = face_order_.begin() + first;
    std::nth_element(begin, begin + half, begin + count, [&](Index a, Index b) {
        const double ca = centroids[a][axis];
        const double cb = centroids[b][axis];
        return ca < cb || (ca == cb && a < b);
    });

    const Index left = build(first, half, centroids, depth + 1);
    const Index right = build(first + half, count - half, centroids, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::vector<Index> AabbTree::query(const Aabb& box) const {
    std::vector<Index> out;
    for_each_overlap(box, [&](Index f) { out.push_back(f); });
    return out;
}

AabbTree build_aabb_tree(const Mesh& mesh) { return AabbTree(mesh); }

std::optional<double> intersect_ray_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c) {
    constexpr double kBarySlack = 1e-10;
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 p = cross(ray.direction, e2);
    const double det = dot(e1, p);
    const double area2 = norm(cross(e1, e2));
    if (!(std::abs(det) > 1e-12 * area2)) return std::nullopt;

    const double inv = 1.0 / det;
    const Vec3 s = ray.origin - a;
    const double u = dot(s, p) * inv;
    if (u < -kBarySlack || u > 1.0 + kBarySlack) return std::nullopt;
    const Vec3 q = cross(s, e1);
    const double v = dot(ray.direction, q) * inv;
    if (v < -kBarySlack || u + v > 1.0 + kBarySlack) return std::nullopt;
    return dot(e2, q) * inv;
}

std::optional<RayHit> ray_first_hit(const AabbTree& tree, const Mesh& mesh, const Ray& ray,
                                    Index exclude_face, double t_min) {
    struct Candidate {
        double t;
        Index face;
    };
    std::vector<Candidate> candidates;
    double best_t = kInf;

    Index stack[64];
    int top = 0;
    stack[top++] = 0;
    const auto& nodes = tree.nodes();
    while (top > 0) {
        const AabbTree::Node& node = nodes[stack[--top]];
        double entry = 0.0;
        if (!ray_box(ray, node.box, t_min, best_t + kRayTieEpsilon, entry)) continue;
        if (!node.is_leaf()) {
            stack[top++] = node.left;
            stack[top++] = node.right;
            continue;
        }
        for (Index f : tree.leaf_faces(node)) {
            if (f == exclude_face) continue;
            const auto [a, b, c] = mesh.corners(f);
            const auto t = intersect_ray_triangle(ray, a, b, c);
            if (!t || *t < t_min || *t >= best_t + kRayTieEpsilon) continue;
            best_t = std::min(best_t, *t);
            candidates.push_back({*t, f});
        }
    }
    if (candidates.empty()) return std::nullopt;

    RayHit hit;
    for (const Candidate& c : candidates) {
        if (c.t - best_t < kRayTieEpsilon && c.face < hit.face) {
            hit.face = c.face;
            hit.t = c.t;
        }
    }
    hit.point = ray.origin + ray.direction * hit.t;
    return hit;
}

bool ray_escapes(const AabbTree& tree, const Mesh& mesh, const Ray& ray, Index exclude_face, double t_min) {
    Index stack[64];
    int top = 0;
    stack[top++] = 0;
    const auto& nodes = tree.nodes();
    while (top > 0) {
        const AabbTree::Node& node = nodes[stack[--top]];
        double entry = 0.0;
        if (!ray_box(ray, node.box, t_min, kInf, entry)) continue;
        if (!node.is_leaf()) {
            stack[top++] = node.left;
            stack[top++] = node.right;
            continue;
        }
        for (Index f : tree.leaf_faces(node)) {
            if (f == exclude_face) continue;
            const auto [a, b, c] = mesh.corners(f);
            const auto t = intersect_ray_triangle(ray, a, b, c);
            if (t && *t >= t_min) return false;
        }
    }
    return true;
}

}  // namespace meshmend

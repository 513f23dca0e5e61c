#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "meshmend/error.hpp"
#include "meshmend/spatial.hpp"
#include "oracles.hpp"
#include "random_mesh.hpp"

using namespace meshmend;

namespace {

IndexedTriangle tri(const Vec3& a, const Vec3& b, const Vec3& c, Index i0, Index i1, Index i2) {
    return IndexedTriangle{{a, b, c}, {i0, i1, i2}};
}

bool box_contains(const Aabb& outer, const Aabb& inner) {
    for (int k = 0; k < 3; ++k)
        if (inner.lo[k] < outer.lo[k] || inner.hi[k] > outer.hi[k]) return false;
    return true;
}

// Where segment p->q crosses the plane through (a, b, c), solved parametrically.
std::optional<Vec3> edge_plane(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = cross(b - a, c - a);
    const double dp = dot(n, p - a), dq = dot(n, q - a);
    if ((dp > 0) == (dq > 0) || dp == dq) return std::nullopt;
    return p + (q - p) * (dp / (dp - dq));
}

bool point_in_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = cross(b - a, c - a);
    return dot(cross(b - a, p - a), n) >= 0 && dot(cross(c - b, p - b), n) >= 0 && dot(cross(a - c, p - c), n) >= 0;
}

bool same_segment(const Segment3& s, const Vec3& p, const Vec3& q, double tol) {
    return (distance(s.a, p) < tol && distance(s.b, q) < tol) || (distance(s.a, q) < tol && distance(s.b, p) < tol);
}

}  // namespace

TEST_CASE("tree over a single triangle") {
    const Mesh m = fixtures::single_triangle();
    const AabbTree tree(m);
    REQUIRE(tree.nodes().size() == 1);
    CHECK(tree.root().is_leaf());
    const Aabb box = bounding_box(m.vertices[0], m.vertices[1], m.vertices[2]);
    CHECK(tree.root_box().lo == box.lo);
    CHECK(tree.root_box().hi == box.hi);
}

TEST_CASE("tree root bounds the cube") {
    const Mesh m = fixtures::cube();
    const AabbTree tree = build_aabb_tree(m);
    CHECK(tree.root_box().lo == Vec3{-0.5, -0.5, -0.5});
    CHECK(tree.root_box().hi == Vec3{0.5, 0.5, 0.5});
}

TEST_CASE("empty mesh has no tree") { CHECK_THROWS_AS(AabbTree(Mesh{}), PreconditionError); }

TEST_CASE("tree structure invariants") {
    gen::Rng rng(8);
    const Mesh m = gen::random_triangles(rng, 1000, 0.05);
    const AabbTree tree(m);
    std::vector<int> seen(m.faces.size(), 0);
    // Every face sits in exactly one leaf and inside every ancestor box.
    std::vector<std::pair<Index, std::vector<Index>>> stack{{0, {}}};
    while (!stack.empty()) {
        auto [id, ancestors] = stack.back();
        stack.pop_back();
        const auto& node = tree.nodes()[id];
        ancestors.push_back(id);
        if (node.is_leaf()) {
            CHECK(node.count <= AabbTree::kLeafSize);
            for (Index f : tree.leaf_faces(node)) {
                ++seen[f];
                for (Index a : ancestors) CHECK(box_contains(tree.nodes()[a].box, tree.face_box(f)));
            }
        } else {
            stack.push_back({node.left, ancestors});
            stack.push_back({node.right, ancestors});
        }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST_CASE("tree queries have no false negatives") {
    gen::Rng rng(21);
    const Mesh m = gen::random_triangles(rng, 1000, 0.05);
    const AabbTree tree(m);
    for (int q = 0; q < 100; ++q) {
        Aabb box;
        box.expand(gen::random_point(rng));
        box.expand(gen::random_point(rng) * 0.3 + box.lo);
        auto got = tree.query(box);
        std::sort(got.begin(), got.end());
        for (Index f = 0; f < m.faces.size(); ++f) {
            const auto [a, b, c] = m.corners(f);
            if (bounding_box(a, b, c).overlaps(box)) CHECK(std::binary_search(got.begin(), got.end(), f));
        }
    }
}

TEST_CASE("tree construction is deterministic") {
    gen::Rng rng(4);
    const Mesh m = gen::random_triangles(rng, 300);
    const AabbTree a(m), b(m);
    REQUIRE(a.nodes().size() == b.nodes().size());
    for (std::size_t i = 0; i < a.nodes().size(); ++i) {
        CHECK(a.nodes()[i].left == b.nodes()[i].left);
        CHECK(a.nodes()[i].first == b.nodes()[i].first);
        if (a.nodes()[i].is_leaf()) {
            const auto fa = a.leaf_faces(a.nodes()[i]), fb = b.leaf_faces(b.nodes()[i]);
            CHECK(std::equal(fa.begin(), fa.end(), fb.begin(), fb.end()));
        }
    }
}

TEST_CASE("ray into a cube face") {
    const Mesh m = fixtures::cube();  // faces at x = +-0.5
    const AabbTree tree(m);
    const Ray ray{{-2.5, 0.1, 0.2}, {1, 0, 0}};
    const auto hit = ray_first_hit(tree, m, ray);
    REQUIRE(hit);
    CHECK(std::abs(hit->t - 2.0) < 1e-9);
    CHECK(distance(hit->point, ray.origin + ray.direction * hit->t) < 1e-9);
    CHECK(m.face_normal(hit->face).x < 0);  // the x- face
}

TEST_CASE("ray misses") {
    const Mesh m = fixtures::cube();
    const AabbTree tree(m);
    CHECK_FALSE(ray_first_hit(tree, m, Ray{{-2, 3, 0}, {1, 0, 0}}));
    CHECK(ray_escapes(tree, m, Ray{{0, 0, 2}, {0, 0, 1}}));
}

TEST_CASE("rays from inside a closed mesh never escape") {
    const Mesh m = fixtures::icosphere(1);
    const AabbTree tree(m);
    gen::Rng rng(2);
    for (int i = 0; i < 200; ++i) CHECK_FALSE(ray_escapes(tree, m, Ray{{0, 0, 0}, gen::random_direction(rng)}));
    const Mesh cube = fixtures::cube();
    CHECK_FALSE(ray_escapes(AabbTree(cube), cube, Ray{{0, 0, 0}, {0, 0, 1}}));
}

TEST_CASE("coincident faces tie to the lowest index") {
    // A farther face comes first so index order and distance order differ.
    Mesh m = fixtures::single_triangle();
    m.vertices.push_back({0, 0, -1});
    m.vertices.push_back({1, 0, -1});
    m.vertices.push_back({0, 1, -1});
    m.faces = {{3, 4, 5}, {0, 1, 2}, {1, 2, 0}};
    const AabbTree tree(m);
    const auto hit = ray_first_hit(tree, m, Ray{{0.2, 0.2, 1}, {0, 0, -1}});
    REQUIRE(hit);
    CHECK(hit->face == 1);
    CHECK(ray_first_hit(tree, m, Ray{{0.2, 0.2, 1}, {0, 0, -1}}, 1)->face == 2);
}

TEST_CASE("edge hits count") {
    const Mesh m{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {{0, 1, 2}, {1, 3, 2}}};
    const AabbTree tree(m);
    const auto hit = ray_first_hit(tree, m, Ray{{0.5, 0.5, 1}, {0, 0, -1}});
    REQUIRE(hit);
    CHECK(hit->face == 0);
}

TEST_CASE("t_min and exclusion") {
    const Mesh m = fixtures::single_triangle();
    const AabbTree tree(m);
    const Ray ray{{0.2, 0.2, 1e-7}, {0, 0, -1}};
    CHECK_FALSE(ray_first_hit(tree, m, ray));  // t = 1e-7 < default t_min
    CHECK(ray_first_hit(tree, m, ray, kInvalidIndex, 0.0));
    CHECK_FALSE(ray_first_hit(tree, m, Ray{{0.2, 0.2, 1}, {0, 0, -1}}, 0));
}

TEST_CASE("tree rays agree with a linear scan") {
    gen::Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const Mesh m = gen::random_triangles(rng, 300);
        const AabbTree tree(m);
        for (int r = 0; r < 1000; ++r) {
            const Ray ray{gen::random_point(rng, -0.3, 1.3), gen::random_direction(rng)};
            const Index exclude = r % 3 == 0 ? static_cast<Index>(gen::below(rng, m.faces.size())) : kInvalidIndex;
            const auto hit = ray_first_hit(tree, m, ray, exclude);
            const auto ref = oracle::linear_first_hit(m, ray, exclude);
            REQUIRE(hit.has_value() == ref.has_value());
            CHECK(ray_escapes(tree, m, ray, exclude) == !hit.has_value());
            if (hit) {
                CHECK(hit->face == ref->face);
                CHECK(std::abs(hit->t - ref->t) < 1e-9);
            }
        }
    }
}

TEST_CASE("shared edge and vertex short-circuit") {
    const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0}, d{0.5, 0.5, 1}, e{0.3, -1, -0.2};
    CHECK(tri_tri_intersect(tri(a, b, c, 0, 1, 2), tri(b, a, d, 1, 0, 3)).kind == TriTriKind::SharedEdge);
    CHECK(tri_tri_intersect(tri(a, b, c, 0, 1, 2), tri(a, d, e, 0, 3, 4)).kind == TriTriKind::SharedVertexOnly);
    // Geometrically piercing but index-adjacent still counts as adjacency.
    const Vec3 f{0.2, 0.2, -1}, g{0.2, 0.2, 1};
    CHECK(tri_tri_intersect(tri(a, b, c, 0, 1, 2), tri(a, f, g, 0, 5, 6)).kind == TriTriKind::SharedVertexOnly);
}

TEST_CASE("coplanar cases") {
    const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
    const Vec3 off{5, 5, 0};
    CHECK(tri_tri_intersect(tri(a, b, c, 0, 1, 2), tri(a + off, b + off, c + off, 3, 4, 5)).kind ==
          TriTriKind::Disjoint);
    const Vec3 s{0.2, 0.2, 0};
    CHECK(tri_tri_intersect(tri(a, b, c, 0, 1, 2), tri(a + s, b + s, c + s, 3, 4, 5)).kind == TriTriKind::Coplanar);
}

TEST_CASE("piercing triangle matches the parametric solve") {
    const Mesh m = fixtures::crossing_triangles();
    const TriTriResult r = classify_face_pair(m, 0, 1);
    REQUIRE(r.kind == TriTriKind::ProperSegment);
    REQUIRE(r.segment);
    // Segment endpoints: where edges of each triangle cross the other's
    // plane, kept if inside the other triangle.
    std::vector<Vec3> ends;
    for (int t = 0; t < 2; ++t) {
        const auto [a, b, c] = m.corners(t);
        const auto [p, q, s] = m.corners(1 - t);
        for (auto [u, v] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}})
            if (auto x = edge_plane(u, v, p, q, s); x && point_in_triangle(*x, p, q, s)) ends.push_back(*x);
    }
    REQUIRE(ends.size() == 2);
    CHECK(same_segment(*r.segment, ends[0], ends[1], 1e-9));
}

TEST_CASE("single-point contact is disjoint") {
    const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
    // Apex touches the interior of the other triangle at one point.
    CHECK(tri_tri_intersect(tri(a, b, c, 0, 1, 2), tri({0.2, 0.2, 0}, {0.2, 0.5, 1}, {0.5, 0.2, 1}, 3, 4, 5)).kind ==
          TriTriKind::Disjoint);
}

TEST_CASE("degenerate input is rejected") {
    const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{2, 0, 0};
    CHECK_THROWS_AS(tri_tri_intersect(tri(a, b, c, 0, 1, 2), tri({0, 0, 1}, {1, 0, 1}, {0, 1, 1}, 3, 4, 5)),
                    DegenerateGeometryError);
}

TEST_CASE("classification is symmetric") {
    gen::Rng rng(13);
    const Mesh m = gen::random_triangles(rng, 200, 0.3);
    std::size_t proper = 0;
    for (Index i = 0; i < m.faces.size(); ++i) {
        if (oracle::zero_area(m, i)) continue;
        for (Index j = i + 1; j < m.faces.size(); ++j) {
            if (oracle::zero_area(m, j)) continue;
            const auto ab = classify_face_pair(m, i, j), ba = classify_face_pair(m, j, i);
            CHECK(ab.kind == ba.kind);
            if (ab.kind == TriTriKind::ProperSegment) {
                ++proper;
                CHECK(same_segment(*ab.segment, ba.segment->a, ba.segment->b, 1e-9));
                // Endpoints lie on both planes.
                for (Index f : {i, j}) {
                    const auto [a, b, c] = m.corners(f);
                    const Vec3 n = normalized(cross(b - a, c - a));
                    CHECK(std::abs(dot(ab.segment->a - a, n)) < 1e-9);
                    CHECK(std::abs(dot(ab.segment->b - a, n)) < 1e-9);
                }
                CHECK(distance(ab.segment->a, ab.segment->b) > 0.0);
            }
        }
    }
    CHECK(proper > 0);
}

TEST_CASE("kind names") {
    CHECK(std::string(to_string(TriTriKind::ProperSegment)) == "ProperSegment");
    CHECK(std::string(to_string(TriTriKind::SharedEdge)) == "SharedEdge");
}

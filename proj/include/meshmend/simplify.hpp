// Quadric-error-metric edge-collapse simplification to a vertex budget.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "meshmend/mesh.hpp"

namespace meshmend {

// Symmetric 4x4 error matrix, stored as its upper triangle:
//   [ a00 a01 a02 b0 ]
//   [     a11 a12 b1 ]
//   [         a22 b2 ]
//   [             c  ]
class Quadric {
public:
    Quadric() = default;

    // w * (n . x + d)^2 for the plane n . x + d = 0 (n of unit length).
    static Quadric from_plane(const Vec3& n, double d, double weight = 1.0);

    Quadric& operator+=(const Quadric& o);
    friend Quadric operator+(Quadric a, const Quadric& b) { return a += b; }

    double evaluate(const Vec3& p) const;

    // Upper-left 3x3 block, row-major.
    std::array<double, 9> linear_block() const;

    // Minimizer of evaluate(); false when the 3x3 block is singular or its
    // condition estimate exceeds `condition_limit`.
    bool minimizer(Vec3& out, double condition_limit) const;

private:
    // a00 a01 a02 b0 a11 a12 b1 a22 b2 c
    std::array<double, 10> m_{};
};

struct SimplifyOptions {
    double boundary_weight = 1e3;    // weight of the plane guarding open boundaries
    double condition_limit = 1e12;   // above this the optimal placement falls back to endpoints/midpoint
    double bbox_inflation = 0.01;    // placements are clamped to the input box grown by this fraction
};

// Sum of incident face-plane quadrics per vertex, plus boundary penalty planes.
std::vector<Quadric> compute_vertex_quadrics(const Mesh& mesh, const SimplifyOptions& options = {});

struct SimplifyResult {
    Mesh mesh;
    std::size_t collapses = 0;
};

// Greedy minimum-cost edge collapse until at most max(target_vertices, 4)
// vertices remain or no admissible collapse is left. A collapse is rejected
// when it would flip or degenerate an incident face or break the link
// condition. Ties in cost go to the lower (min index, max index) edge.
// Returns the input unchanged when it already has <= target_vertices vertices.
SimplifyResult simplify(const Mesh& mesh, std::size_t target_vertices, const SimplifyOptions& options = {});

inline Mesh simplify_to(const Mesh& mesh, std::size_t target_vertices, const SimplifyOptions& options = {}) {
    return simplify(mesh, target_vertices, options).mesh;
}

}  // namespace meshmend

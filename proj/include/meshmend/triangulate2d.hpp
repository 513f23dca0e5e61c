// Constrained triangulation of a single triangle with interior/boundary
// points and constraint segments. Used to retriangulate a face along its
// intersection segments.
#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "meshmend/error.hpp"

namespace meshmend {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

// Twice the signed area of (a, b, c); positive for counter-clockwise. The
// sign is exact: near-collinear inputs fall back to expansion arithmetic.
double orient2d(const Point2& a, const Point2& b, const Point2& c);

class TriangulationError : public MeshError {
public:
    using MeshError::MeshError;
};

struct ConstrainedTriangulation {
    // points[0..2] are the outer corners; then merged input points, then
    // points created where constraints cross.
    std::vector<Point2> points;
    // input point k -> index into points
    std::vector<int> input_to_point;
    // counter-clockwise triangles over points
    std::vector<std::array<int, 3>> triangles;
};

// Triangulates the counter-clockwise triangle `outer` so that every
// constraint segment is a chain of triangle edges. Constraint endpoints
// index the input as 0..2 = outer corners, 3 + k = points[k]. Points closer
// than `tol` merge; points within `tol` of the outer boundary snap onto it;
// constraints are split where they cross each other or pass through a
// point. Unconstrained edges are made locally Delaunay.
// Throws TriangulationError when a constraint cannot be recovered.
ConstrainedTriangulation triangulate_constrained(const std::array<Point2, 3>& outer,
                                                 std::span<const Point2> points,
                                                 std::span<const std::pair<int, int>> constraints,
                                                 double tol);

}  // namespace meshmend

// Self-intersection detection and remeshing. Faces that cross are split
// along their intersection segments so that the segment becomes a chain of
// edges in both faces.
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "meshmend/mesh.hpp"
#include "meshmend/spatial.hpp"

namespace meshmend {

using FacePair = std::pair<Index, Index>;  // first < second

struct IntersectingPair {
    Index first;
    Index second;
    TriTriResult result;  // ProperSegment or Coplanar
};

// Broad phase through an AabbTree, narrow phase through tri_tri_intersect.
// Faces with exactly zero area are skipped. Pairs come back sorted.
std::vector<IntersectingPair> find_intersecting_pairs(const Mesh& mesh, double eps = kTriTriEpsilon,
                                                      unsigned workers = 0);

// Unordered face pairs whose intersection is a ProperSegment or Coplanar.
std::vector<FacePair> detect_self_intersections(const Mesh& mesh, double eps = kTriTriEpsilon,
                                                unsigned workers = 0);

struct RemeshOptions {
    std::size_t samples_per_segment = 2;  // points per segment, endpoints included
    double snap_tolerance = 1e-9;         // scaled by max(1, bounding-box diagonal)
    double eps = kTriTriEpsilon;
    unsigned workers = 0;
};

struct RemeshResult {
    Mesh mesh;
    std::size_t remeshed_face_count = 0;
    std::vector<Index> parent_face;   // input face of every output face
    std::vector<Index> failed_faces;  // intersecting faces left unmodified
    std::size_t coplanar_pairs = 0;   // detected but not remeshed
};

// Replaces every face involved in a ProperSegment pair by a triangulation
// constrained to its intersection segments. Sub-triangles inherit the
// parent's winding and are emitted in parent-face order; untouched faces
// are copied. New vertices are created per face, so vertices along a shared
// segment come out duplicated (merge them with remove_duplicate_vertices).
// Faces whose triangulation fails are kept as they were and listed.
RemeshResult remesh_self_intersections(const Mesh& mesh, const RemeshOptions& options = {});

}  // namespace meshmend

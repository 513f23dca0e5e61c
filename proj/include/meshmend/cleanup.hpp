// Topology cleanup passes: duplicate vertices and faces, degenerate faces,
// isolated vertices. Every pass is a pure function of its input, keeps the
// relative order of what survives and never moves a surviving vertex.
#pragma once

#include <cstddef>
#include <vector>

#include "meshmend/mesh.hpp"

namespace meshmend {

// old vertex index -> new vertex index, or kRemoved. Kept vertices keep
// their relative order.
struct VertexRemap {
    static constexpr Index kRemoved = kInvalidIndex;
    std::vector<Index> old_to_new;

    Index operator[](std::size_t old_index) const { return old_to_new[old_index]; }
    std::size_t size() const { return old_to_new.size(); }
};

struct VertexPassResult {
    Mesh mesh;
    VertexRemap remap;
    std::vector<Index> removed;  // removed input vertex indices, ascending
    std::size_t removed_count() const { return removed.size(); }
};

struct FacePassResult {
    Mesh mesh;
    std::vector<Index> removed;  // removed input face indices, ascending
    std::size_t removed_count() const { return removed.size(); }
};

inline constexpr double kDefaultDegeneracyEpsilon = 1e-12;

// Merges vertices equal under `tolerance` (Euclidean distance <= tolerance;
// tolerance 0 means exact coordinate equality). Vertices are visited in index
// order and each one merges into the lowest-index earlier survivor within
// range. Faces are rewritten through the remap; faces that become degenerate
// are left for remove_degenerate_faces.
VertexPassResult remove_duplicate_vertices(const Mesh& mesh, double tolerance = 0.0);

// Faces whose index triples are equal as sets are duplicates; the first
// occurrence survives with its winding.
FacePassResult remove_duplicate_faces(const Mesh& mesh);

// True when |e1 x e2| <= epsilon * max(|e1|, |e2|, |e3|)^2.
bool is_degenerate_face(const Vec3& a, const Vec3& b, const Vec3& c,
                        double epsilon = kDefaultDegeneracyEpsilon);

// Drops degenerate faces. Their vertices are kept.
FacePassResult remove_degenerate_faces(const Mesh& mesh, double epsilon = kDefaultDegeneracyEpsilon);

// Drops vertices no face references.
VertexPassResult remove_isolated_vertices(const Mesh& mesh);

// Drops the faces flagged in `remove` (size == face_count).
FacePassResult remove_faces(const Mesh& mesh, const std::vector<bool>& remove);

}  // namespace meshmend

#include "meshmend/mesh.hpp"

#include <string>

#include "meshmend/error.hpp"

namespace meshmend {

Vec3 Mesh::face_normal(std::size_t face) const {
    const auto [a, b, c] = corners(face);
    return cross(b - a, c - b);
}

void validate_indices(const Mesh& mesh) {
    const std::size_t n = mesh.vertices.size();
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        for (Index i : mesh.faces[f]) {
            if (i >= n) {
                throw IndexRangeError("face " + std::to_string(f) + " references vertex " +
                                      std::to_string(i) + " but the mesh has " +
                                      std::to_string(n) + " vertices");
            }
        }
    }
}

Aabb bounding_box(const Mesh& mesh) {
    Aabb box;
    for (const Vec3& v : mesh.vertices) box.expand(v);
    return box;
}

Aabb bounding_box(const Vec3& a, const Vec3& b, const Vec3& c) {
    Aabb box;
    box.expand(a);
    box.expand(b);
    box.expand(c);
    return box;
}

FaceAreas compute_face_areas(const Mesh& mesh) {
    FaceAreas out;
    out.areas.reserve(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto [a, b, c] = mesh.corners(f);
        const double area = 0.5 * norm(cross(b - a, c - a));
        out.areas.push_back(area);
        out.total += area;
    }
    return out;
}

Mesh normalize_unit_sphere(Mesh mesh) {
    if (mesh.vertices.empty()) throw PreconditionError("cannot normalize a mesh without vertices");

    const Vec3 center = bounding_box(mesh).center();
    double max_norm = 0.0;
    for (Vec3& v : mesh.vertices) {
        v -= center;
        max_norm = std::max(max_norm, norm(v));
    }
    if (!(max_norm > 0.0)) throw DegenerateGeometryError("all vertices coincide; scale is undefined");

    for (Vec3& v : mesh.vertices) v = v / max_norm;
    return mesh;
}

double signed_volume(const Mesh& mesh) {
    double sum = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto [a, b, c] = mesh.corners(f);
        sum += dot(a, cross(b, c));
    }
    return sum / 6.0;
}

}  // namespace meshmend

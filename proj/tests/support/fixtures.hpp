// Small hand-built meshes shared by unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "meshmend/mesh.hpp"

namespace fixtures {

using meshmend::Face;
using meshmend::Index;
using meshmend::Mesh;
using meshmend::Vec3;

inline Mesh single_triangle() {
    return Mesh{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}};
}

// Axis-aligned cube, outward winding.
inline Mesh cube(const Vec3& center = {0, 0, 0}, double half = 0.5) {
    Mesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back(center + Vec3{(i & 1) ? half : -half, (i & 2) ? half : -half, (i & 4) ? half : -half});
    m.faces = {
        {0, 2, 1}, {1, 2, 3},  // z-
        {4, 5, 6}, {5, 7, 6},  // z+
        {0, 1, 4}, {1, 5, 4},  // y-
        {2, 6, 3}, {3, 6, 7},  // y+
        {0, 4, 2}, {2, 4, 6},  // x-
        {1, 3, 5}, {3, 7, 5},  // x+
    };
    return m;
}

inline Mesh unit_cube() { return cube({0.5, 0.5, 0.5}, 0.5); }

// Regular icosahedron on the unit sphere, outward winding.
inline Mesh icosahedron() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    const double s = 1.0 / std::sqrt(1.0 + t * t);
    Mesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& v : m.vertices) v = v * s;
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    return m;
}

// Icosahedron with each face split into four `levels` times, projected onto
// the unit sphere.
inline Mesh icosphere(int levels) {
    Mesh m = icosahedron();
    for (int l = 0; l < levels; ++l) {
        std::map<std::pair<Index, Index>, Index> midpoint;
        auto mid = [&](Index a, Index b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            m.vertices.push_back(meshmend::normalized(m.vertices[a] + m.vertices[b]));
            const Index v = static_cast<Index>(m.vertices.size() - 1);
            midpoint.emplace(key, v);
            return v;
        };
        std::vector<Face> next;
        for (const Face& f : m.faces) {
            const Index ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    return m;
}

inline Mesh inverted(Mesh m) {
    for (Face& f : m.faces) f = meshmend::flipped(f);
    return m;
}

inline Mesh merged(const Mesh& a, const Mesh& b) {
    Mesh m = a;
    const Index base = static_cast<Index>(a.vertices.size());
    m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const Face& f : b.faces) m.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    return m;
}

// Cube of side 2 containing a cube of side 1; inner faces are 12..23 and
// inner vertices 8..15.
inline Mesh nested_cubes() { return merged(cube({0, 0, 0}, 1.0), cube({0, 0, 0}, 0.5)); }

// Two triangles crossing through each other's interior.
inline Mesh crossing_triangles() {
    return Mesh{{{-1, -1, 0}, {1, -1, 0}, {0, 1, 0}, {0.1, -0.3, -0.8}, {0.2, 0.4, -0.7}, {-0.1, 0.05, 0.9}},
                {{0, 1, 2}, {3, 4, 5}}};
}

// Two unit cubes overlapping along a skewed offset; no face planes coincide.
inline Mesh crossing_cubes() { return merged(cube({0, 0, 0}, 0.5), cube({0.37, 0.29, 0.23}, 0.5)); }

}  // namespace fixtures

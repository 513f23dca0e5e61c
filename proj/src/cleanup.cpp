#include "meshmend/cleanup.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace meshmend {
namespace {

std::uint64_t mix(std::uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

struct PositionHash {
    std::size_t operator()(const Vec3& p) const {
        // +0.0 and -0.0 compare equal, so they must hash equal.
        auto bits = [](double d) { return std::bit_cast<std::uint64_t>(d == 0.0 ? 0.0 : d); };
        return mix(bits(p.x) ^ mix(bits(p.y) ^ mix(bits(p.z))));
    }
};

struct CellKey {
    std::int64_t x, y, z;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        return mix(static_cast<std::uint64_t>(k.x) ^
                   mix(static_cast<std::uint64_t>(k.y) ^ mix(static_cast<std::uint64_t>(k.z))));
    }
};

std::int64_t cell_coord(double value, double cell) {
    constexpr double kLimit = 4.0e18;
    return static_cast<std::int64_t>(std::clamp(std::floor(value / cell), -kLimit, kLimit));
}

// survivor_of[i] is the lowest-index earlier survivor that vertex i merges into, or i itself.
std::vector<Index> find_survivors(const std::vector<Vec3>& vertices, double tolerance) {
    const std::size_t n = vertices.size();
    std::vector<Index> survivor_of(n);

    if (tolerance <= 0.0) {
        std::unordered_map<Vec3, Index, PositionHash> first_seen;
        first_seen.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto [it, inserted] = first_seen.try_emplace(vertices[i], static_cast<Index>(i));
            survivor_of[i] = it->second;
        }
        return survivor_of;
    }

    const double tol2 = tolerance * tolerance;
    std::unordered_map<CellKey, std::vector<Index>, CellHash> grid;
    grid.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& p = vertices[i];
        const CellKey home{cell_coord(p.x, tolerance), cell_coord(p.y, tolerance),
                           cell_coord(p.z, tolerance)};
        Index best = kInvalidIndex;
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = grid.find({home.x + dx, home.y + dy, home.z + dz});
                    if (it == grid.end()) continue;
                    for (Index s : it->second)
                        if (s < best && squared_norm(vertices[s] - p) <= tol2) best = s;
                }
        if (best == kInvalidIndex) {
            survivor_of[i] = static_cast<Index>(i);
            grid[home].push_back(static_cast<Index>(i));
        } else {
            survivor_of[i] = best;
        }
    }
    return survivor_of;
}

}  // namespace

VertexPassResult remove_duplicate_vertices(const Mesh& mesh, double tolerance) {
    const std::vector<Index> survivor_of = find_survivors(mesh.vertices, tolerance);

    VertexPassResult out;
    out.remap.old_to_new.assign(mesh.vertices.size(), VertexRemap::kRemoved);
    out.mesh.vertices.reserve(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        if (survivor_of[i] == i) {
            out.remap.old_to_new[i] = static_cast<Index>(out.mesh.vertices.size());
            out.mesh.vertices.push_back(mesh.vertices[i]);
        } else {
            out.removed.push_back(static_cast<Index>(i));
        }
    }
    // Survivors always precede the vertices merged into them.
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        out.remap.old_to_new[i] = out.remap.old_to_new[survivor_of[i]];

    out.mesh.faces.reserve(mesh.faces.size());
    for (const Face& f : mesh.faces)
        out.mesh.faces.push_back({out.remap[f[0]], out.remap[f[1]], out.remap[f[2]]});
    return out;
}

FacePassResult remove_duplicate_faces(const Mesh& mesh) {
    struct FaceKeyHash {
        std::size_t operator()(const Face& f) const {
            return mix(f[0] ^ mix(static_cast<std::uint64_t>(f[1]) << 21 ^ mix(f[2])));
        }
    };
    std::unordered_map<Face, Index, FaceKeyHash> seen;
    seen.reserve(mesh.faces.size());

    std::vector<bool> remove(mesh.faces.size(), false);
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        // Set semantics: (a, a, b) and (a, b, b) are the same face.
        Face key = mesh.faces[i];
        std::sort(key.begin(), key.end());
        if (key[1] == key[2]) key[1] = key[0];
        if (!seen.try_emplace(key, static_cast<Index>(i)).second) remove[i] = true;
    }
    return remove_faces(mesh, remove);
}

bool is_degenerate_face(const Vec3& a, const Vec3& b, const Vec3& c, double epsilon) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - b;
    const Vec3 e3 = a - c;
    const double longest2 = std::max({squared_norm(e1), squared_norm(e2), squared_norm(e3)});
    return norm(cross(e1, e2)) <= epsilon * longest2;
}

FacePassResult remove_degenerate_faces(const Mesh& mesh, double epsilon) {
    std::vector<bool> remove(mesh.faces.size(), false);
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        const auto [a, b, c] = mesh.corners(i);
        remove[i] = is_degenerate_face(a, b, c, epsilon);
    }
    return remove_faces(mesh, remove);
}

VertexPassResult remove_isolated_vertices(const Mesh& mesh) {
    std::vector<bool> used(mesh.vertices.size(), false);
    for (const Face& f : mesh.faces)
        for (Index i : f) used[i] = true;

    VertexPassResult out;
    out.remap.old_to_new.assign(mesh.vertices.size(), VertexRemap::kRemoved);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        if (used[i]) {
            out.remap.old_to_new[i] = static_cast<Index>(out.mesh.vertices.size());
            out.mesh.vertices.push_back(mesh.vertices[i]);
        } else {
            out.removed.push_back(static_cast<Index>(i));
        }
    }
    out.mesh.faces.reserve(mesh.faces.size());
    for (const Face& f : mesh.faces)
        out.mesh.faces.push_back({out.remap[f[0]], out.remap[f[1]], out.remap[f[2]]});
    return out;
}

FacePassResult remove_faces(const Mesh& mesh, const std::vector<bool>& remove) {
    FacePassResult out;
    out.mesh.vertices = mesh.vertices;
    out.mesh.faces.reserve(mesh.faces.size());
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        if (remove[i])
            out.removed.push_back(static_cast<Index>(i));
        else
            out.mesh.faces.push_back(mesh.faces[i]);
    }
    return out;
}

}  // namespace meshmend

#include "meshmend/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <unordered_map>

#include "meshmend/cleanup.hpp"

namespace meshmend {

Quadric Quadric::from_plane(const Vec3& n, double d, double weight) {
    Quadric q;
    q.m_ = {n.x * n.x, n.x * n.y, n.x * n.z, n.x * d, n.y * n.y, n.y * n.z, n.y * d,
            n.z * n.z, n.z * d,   d * d};
    for (double& v : q.m_) v *= weight;
    return q;
}

Quadric& Quadric::operator+=(const Quadric& o) {
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += o.m_[i];
    return *this;
}

double Quadric::evaluate(const Vec3& p) const {
    const auto& m = m_;
    return m[0] * p.x * p.x + 2 * m[1] * p.x * p.y + 2 * m[2] * p.x * p.z + 2 * m[3] * p.x +
           m[4] * p.y * p.y + 2 * m[5] * p.y * p.z + 2 * m[6] * p.y + m[7] * p.z * p.z + 2 * m[8] * p.z +
           m[9];
}

std::array<double, 9> Quadric::linear_block() const {
    return {m_[0], m_[1], m_[2], m_[1], m_[4], m_[5], m_[2], m_[5], m_[7]};
}

bool Quadric::minimizer(Vec3& out, double condition_limit) const {
    const auto a = linear_block();
    // Adjugate (symmetric).
    const double c00 = a[4] * a[8] - a[5] * a[7];
    const double c01 = a[2] * a[7] - a[1] * a[8];
    const double c02 = a[1] * a[5] - a[2] * a[4];
    const double c11 = a[0] * a[8] - a[2] * a[6];
    const double c12 = a[2] * a[3] - a[0] * a[5];
    const double c22 = a[0] * a[4] - a[1] * a[3];
    const double det = a[0] * c00 + a[1] * (a[5] * a[6] - a[3] * a[8]) + a[2] * (a[3] * a[7] - a[4] * a[6]);
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;

    const double inv_det = 1.0 / det;
    const std::array<double, 9> inv{c00 * inv_det, c01 * inv_det, c02 * inv_det,
                                    c01 * inv_det, c11 * inv_det, c12 * inv_det,
                                    c02 * inv_det, c12 * inv_det, c22 * inv_det};
    double norm_a = 0.0;
    double norm_inv = 0.0;
    for (int i = 0; i < 9; ++i) {
        norm_a += a[i] * a[i];
        norm_inv += inv[i] * inv[i];
    }
    if (std::sqrt(norm_a) * std::sqrt(norm_inv) > condition_limit) return false;

    const Vec3 b{m_[3], m_[6], m_[8]};
    out = {-(inv[0] * b.x + inv[1] * b.y + inv[2] * b.z), -(inv[3] * b.x + inv[4] * b.y + inv[5] * b.z),
           -(inv[6] * b.x + inv[7] * b.y + inv[8] * b.z)};
    return is_finite(out);
}

std::vector<Quadric> compute_vertex_quadrics(const Mesh& mesh, const SimplifyOptions& options) {
    std::vector<Quadric> quadrics(mesh.vertices.size());
    std::map<std::pair<Index, Index>, std::pair<int, Index>> edge_use;  // edge -> (face count, a face)
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto [a, b, c] = mesh.corners(f);
        const Vec3 n = normalized(cross(b - a, c - a));
        if (squared_norm(n) == 0.0) continue;
        const Quadric q = Quadric::from_plane(n, -dot(n, a));
        for (Index v : mesh.faces[f]) quadrics[v] += q;
        for (int e = 0; e < 3; ++e) {
            Index u = mesh.faces[f][e];
            Index v = mesh.faces[f][(e + 1) % 3];
            if (u > v) std::swap(u, v);
            auto& use = edge_use[{u, v}];
            if (use.first++ == 0) use.second = static_cast<Index>(f);
        }
    }
    for (const auto& [edge, use] : edge_use) {
        if (use.first != 1) continue;
        const Vec3 p = mesh.vertices[edge.first];
        const Vec3 q = mesh.vertices[edge.second];
        const Vec3 face_n = normalized(mesh.face_normal(use.second));
        const Vec3 guard_n = normalized(cross(q - p, face_n));
        if (squared_norm(guard_n) == 0.0) continue;
        const Quadric guard = Quadric::from_plane(guard_n, -dot(guard_n, p), options.boundary_weight);
        quadrics[edge.first] += guard;
        quadrics[edge.second] += guard;
    }
    return quadrics;
}

namespace {

struct Candidate {
    double cost;
    Index a;
    Index b;
    std::uint32_t version_a;
    std::uint32_t version_b;
    Vec3 target;
};

struct CandidateOrder {
    // priority_queue pops the "largest": lowest cost, then lowest (a, b).
    bool operator()(const Candidate& x, const Candidate& y) const {
        if (x.cost != y.cost) return x.cost > y.cost;
        if (x.a != y.a) return x.a > y.a;
        return x.b > y.b;
    }
};

class EdgeCollapser {
public:
    EdgeCollapser(const Mesh& mesh, const SimplifyOptions& options)
        : options_(options), pos_(mesh.vertices), faces_(mesh.faces),
          face_alive_(mesh.faces.size(), true), vertex_faces_(mesh.vertices.size()),
          version_(mesh.vertices.size(), 0), quadrics_(compute_vertex_quadrics(mesh, options)) {
        for (std::size_t f = 0; f < faces_.size(); ++f)
            for (Index v : faces_[f]) vertex_faces_[v].push_back(static_cast<Index>(f));
        for (const auto& list : vertex_faces_)
            if (!list.empty()) ++live_vertices_;
        const Aabb box = bounding_box(mesh);
        clamp_box_ = box.inflated(options.bbox_inflation * box.diagonal());

        for (std::size_t f = 0; f < faces_.size(); ++f) {
            for (int e = 0; e < 3; ++e) {
                Index u = faces_[f][e];
                Index v = faces_[f][(e + 1) % 3];
                if (u > v) std::swap(u, v);
                push(u, v);
            }
        }
    }

    std::size_t live_vertices() const { return live_vertices_; }

    std::size_t run(std::size_t target) {
        std::size_t collapses = 0;
        while (live_vertices_ > target && !heap_.empty()) {
            const Candidate c = heap_.top();
            heap_.pop();
            if (version_[c.a] != c.version_a || version_[c.b] != c.version_b) continue;
            if (vertex_faces_[c.a].empty() || vertex_faces_[c.b].empty()) continue;
            if (!admissible(c.a, c.b, c.target)) continue;
            collapse(c.a, c.b, c.target);
            ++collapses;
        }
        return collapses;
    }

    Mesh extract() const {
        Mesh out;
        std::vector<Index> remap(pos_.size(), kInvalidIndex);
        for (std::size_t v = 0; v < pos_.size(); ++v) {
            if (vertex_faces_[v].empty()) continue;
            remap[v] = static_cast<Index>(out.vertices.size());
            out.vertices.push_back(pos_[v]);
        }
        for (std::size_t f = 0; f < faces_.size(); ++f)
            if (face_alive_[f]) out.faces.push_back({remap[faces_[f][0]], remap[faces_[f][1]], remap[faces_[f][2]]});
        return out;
    }

private:
    Vec3 clamp(const Vec3& p) const {
        return {std::clamp(p.x, clamp_box_.lo.x, clamp_box_.hi.x), std::clamp(p.y, clamp_box_.lo.y, clamp_box_.hi.y),
                std::clamp(p.z, clamp_box_.lo.z, clamp_box_.hi.z)};
    }

    void push(Index a, Index b) {
        if (a > b) std::swap(a, b);
        const Quadric q = quadrics_[a] + quadrics_[b];
        Vec3 target;
        if (q.minimizer(target, options_.condition_limit)) {
            target = clamp(target);
        } else {
            const Vec3 options[3] = {pos_[a], pos_[b], (pos_[a] + pos_[b]) * 0.5};
            target = options[0];
            double best = q.evaluate(target);
            for (int i = 1; i < 3; ++i) {
                const double cost = q.evaluate(options[i]);
                if (cost < best) {
                    best = cost;
                    target = options[i];
                }
            }
        }
        heap_.push({std::max(0.0, q.evaluate(target)), a, b, version_[a], version_[b], target});
    }

    bool contains(Index f, Index v) const {
        const Face& t = faces_[f];
        return t[0] == v || t[1] == v || t[2] == v;
    }

    std::vector<Index> neighbors(Index v) const {
        std::vector<Index> out;
        for (Index f : vertex_faces_[v])
            for (Index w : faces_[f])
                if (w != v) out.push_back(w);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool admissible(Index a, Index b, const Vec3& target) const {
        const auto na = neighbors(a);
        if (!std::binary_search(na.begin(), na.end(), b)) return false;
        const auto nb = neighbors(b);

        // Link condition: every common neighbor must close a face with the edge.
        std::vector<Index> common;
        std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
        for (Index c : common) {
            bool closes = false;
            for (Index f : vertex_faces_[a])
                if (contains(f, b) && contains(f, c)) closes = true;
            if (!closes) return false;
        }

        // No surviving incident face may flip or collapse.
        for (Index v : {a, b}) {
            for (Index f : vertex_faces_[v]) {
                if (contains(f, a) && contains(f, b)) continue;
                const Face& t = faces_[f];
                std::array<Vec3, 3> after{pos_[t[0]], pos_[t[1]], pos_[t[2]]};
                for (int k = 0; k < 3; ++k)
                    if (t[k] == a || t[k] == b) after[k] = target;
                const Vec3 n_before = cross(pos_[t[1]] - pos_[t[0]], pos_[t[2]] - pos_[t[0]]);
                const Vec3 n_after = cross(after[1] - after[0], after[2] - after[0]);
                if (!(dot(n_before, n_after) > 0.0)) return false;
                if (is_degenerate_face(after[0], after[1], after[2])) return false;
            }
        }
        return true;
    }

    void detach(Index f) {
        face_alive_[f] = false;
        for (Index v : faces_[f]) {
            auto& list = vertex_faces_[v];
            list.erase(std::remove(list.begin(), list.end(), f), list.end());
            if (list.empty()) --live_vertices_;
        }
    }

    void collapse(Index a, Index b, const Vec3& target) {
        pos_[a] = target;
        quadrics_[a] += quadrics_[b];

        const std::vector<Index> b_faces = vertex_faces_[b];
        for (Index f : b_faces)
            if (contains(f, a)) detach(f);
        const bool a_emptied = vertex_faces_[a].empty();
        if (!vertex_faces_[b].empty()) {
            for (Index f : vertex_faces_[b]) {
                for (Index& v : faces_[f])
                    if (v == b) v = a;
                vertex_faces_[a].push_back(f);
            }
            vertex_faces_[b].clear();
            --live_vertices_;
            if (a_emptied) ++live_vertices_;
        }
        ++version_[a];
        ++version_[b];

        // Faces around a that became set-equal: keep the lowest face index.
        std::vector<Index> around = vertex_faces_[a];
        std::sort(around.begin(), around.end());
        std::vector<std::pair<Face, Index>> keys;
        for (Index f : around) {
            Face key = faces_[f];
            std::sort(key.begin(), key.end());
            keys.emplace_back(key, f);
        }
        std::sort(keys.begin(), keys.end());
        for (std::size_t i = 1; i < keys.size(); ++i)
            if (keys[i].first == keys[i - 1].first && face_alive_[keys[i].second]) detach(keys[i].second);

        if (vertex_faces_[a].empty()) return;
        for (Index n : neighbors(a)) push(a, n);
    }

    SimplifyOptions options_;
    std::vector<Vec3> pos_;
    std::vector<Face> faces_;
    std::vector<bool> face_alive_;
    std::vector<std::vector<Index>> vertex_faces_;
    std::vector<std::uint32_t> version_;
    std::vector<Quadric> quadrics_;
    std::size_t live_vertices_ = 0;
    Aabb clamp_box_;
    std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap_;
};

}  // namespace

SimplifyResult simplify(const Mesh& mesh, std::size_t target_vertices, const SimplifyOptions& options) {
    if (mesh.vertices.size() <= target_vertices || mesh.faces.empty()) return {mesh, 0};
    const std::size_t target = std::max<std::size_t>(target_vertices, 4);

    EdgeCollapser collapser(mesh, options);
    SimplifyResult out;
    out.collapses = collapser.run(target);
    out.mesh = collapser.extract();
    return out;
}

}  // namespace meshmend

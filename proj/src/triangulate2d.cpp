#include "meshmend/triangulate2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace meshmend {
namespace {

// Error-free transformations; an expansion is a sum of non-overlapping
// doubles stored in increasing magnitude.
void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bv = s - a;
    e = (a - (s - bv)) + (b - bv);
}

void two_product(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

// Adds b to the expansion e in place, dropping zero components.
void grow_expansion(std::vector<double>& e, double b) {
    double q = b;
    std::size_t out = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        double s, err;
        two_sum(q, e[i], s, err);
        q = s;
        if (err != 0.0) e[out++] = err;
    }
    e.resize(out);
    if (q != 0.0 || e.empty()) e.push_back(q);
}

double orient2d_exact(const Point2& a, const Point2& b, const Point2& c) {
    const std::array<std::array<double, 2>, 6> terms{{{a.x, b.y}, {-a.y, b.x}, {b.x, c.y},
                                                      {-b.y, c.x}, {c.x, a.y}, {-c.y, a.x}}};
    std::vector<double> sum;
    sum.reserve(16);
    for (const auto& [u, v] : terms) {
        double p, e;
        two_product(u, v, p, e);
        grow_expansion(sum, e);
        grow_expansion(sum, p);
    }
    return sum.back();  // most significant component carries the sign
}

using Tri = std::array<int, 3>;

std::uint64_t edge_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

std::uint64_t undirected_key(int a, int b) { return a < b ? edge_key(a, b) : edge_key(b, a); }

double length(const Point2& a, const Point2& b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Signed distance of p from the directed line a->b; positive on the left.
double line_distance(const Point2& a, const Point2& b, const Point2& p) {
    const double len = length(a, b);
    return len > 0.0 ? orient2d(a, b, p) / len : length(a, p);
}

bool segments_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double o1 = orient2d(a, b, c);
    const double o2 = orient2d(a, b, d);
    const double o3 = orient2d(c, d, a);
    const double o4 = orient2d(c, d, b);
    return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

// Positive when d lies inside the circumcircle of counter-clockwise (a, b, c).
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

class Triangulation {
public:
    Triangulation(std::vector<Point2>& points, double tol) : pts_(points), tol_(tol) {
        add_tri({0, 1, 2});
    }

    const std::vector<Tri>& triangles() const { return tris_; }

    // Inserts point `p`; returns the vertex it became, which is an existing
    // vertex when one lies within tolerance.
    int insert(int p) {
        const Point2& q = pts_[p];
        int best = -1;
        double best_score = -INFINITY;
        std::array<double, 3> best_d{};
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            const Tri& t = tris_[i];
            const std::array<double, 3> d{line_distance(pts_[t[0]], pts_[t[1]], q),
                                          line_distance(pts_[t[1]], pts_[t[2]], q),
                                          line_distance(pts_[t[2]], pts_[t[0]], q)};
            const double score = std::min({d[0], d[1], d[2]});
            if (score > best_score) {
                best_score = score;
                best = i;
                best_d = d;
            }
        }
        if (best < 0 || best_score < -4.0 * tol_) throw TriangulationError("point lies outside the face");

        const Tri t = tris_[best];
        for (int v : t)
            if (length(pts_[v], q) <= tol_) return v;

        int edge = 0;
        for (int e = 1; e < 3; ++e)
            if (std::abs(best_d[e]) < std::abs(best_d[edge])) edge = e;
        if (std::abs(best_d[edge]) <= tol_)
            split_edge(best, edge, p);
        else
            split_interior(best, p);
        return p;
    }

    bool has_edge(int a, int b) const {
        return edge_owner_.count(edge_key(a, b)) > 0 || edge_owner_.count(edge_key(b, a)) > 0;
    }

    // Forces segment a-b to be an edge and records it in `constrained`. When
    // flipping fails because a vertex sits within rounding noise of the
    // segment, the segment is split at that vertex instead.
    void recover(int a, int b, std::unordered_set<std::uint64_t>& constrained, int depth = 0) {
        if (has_edge(a, b) || flip_until_edge(a, b, constrained)) {
            constrained.insert(undirected_key(a, b));
            return;
        }
        const Point2& pa = pts_[a];
        const Point2& pb = pts_[b];
        const double len = length(pa, pb);
        int split = -1;
        double best = 64.0 * tol_;
        for (int k = 0; k < static_cast<int>(pts_.size()); ++k) {
            if (k == a || k == b) continue;
            const double s = ((pts_[k].x - pa.x) * (pb.x - pa.x) + (pts_[k].y - pa.y) * (pb.y - pa.y)) / (len * len);
            if (s * len <= tol_ || (1.0 - s) * len <= tol_) continue;
            const double d = std::abs(line_distance(pa, pb, pts_[k]));
            if (d <= best) {
                best = d;
                split = k;
            }
        }
        if (split < 0 || depth >= 16) throw TriangulationError("constraint could not be recovered");
        recover(a, split, constrained, depth + 1);
        recover(split, b, constrained, depth + 1);
    }

    // Lawson flips on unconstrained interior edges.
    void make_delaunay(const std::unordered_set<std::uint64_t>& constrained, double scale) {
        const double threshold = 1e-10 * scale * scale * scale * scale;
        const int max_passes = 64;
        for (int pass = 0; pass < max_passes; ++pass) {
            bool flipped = false;
            for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
                for (int e = 0; e < 3; ++e) {
                    const Tri t = tris_[i];
                    const int u = t[e];
                    const int v = t[(e + 1) % 3];
                    const int w = t[(e + 2) % 3];
                    if (constrained.count(undirected_key(u, v))) continue;
                    const auto twin = edge_owner_.find(edge_key(v, u));
                    if (twin == edge_owner_.end()) continue;
                    const int j = twin->second;
                    const int x = opposite(tris_[j], v, u);
                    if (incircle(pts_[u], pts_[v], pts_[w], pts_[x]) <= threshold) continue;
                    if (orient2d(pts_[u], pts_[x], pts_[w]) <= 0.0 || orient2d(pts_[x], pts_[v], pts_[w]) <= 0.0)
                        continue;
                    set_tri(i, {u, x, w});
                    set_tri(j, {x, v, w});
                    flipped = true;
                    break;
                }
            }
            if (!flipped) return;
        }
    }

private:
    // Sloan-style flipping of the edges crossing a-b. Returns false when it
    // gets stuck, leaving a valid triangulation behind.
    bool flip_until_edge(int a, int b, const std::unordered_set<std::uint64_t>& constrained) {
        const Point2& pa = pts_[a];
        const Point2& pb = pts_[b];
        auto crosses = [&](int u, int v) {
            return u != a && u != b && v != a && v != b && segments_cross(pa, pb, pts_[u], pts_[v]);
        };

        std::deque<std::pair<int, int>> queue;
        for (const Tri& t : tris_)
            for (int e = 0; e < 3; ++e) {
                const int u = t[e];
                const int v = t[(e + 1) % 3];
                if (u < v && crosses(u, v)) queue.emplace_back(u, v);
            }

        std::size_t stalled = 0;
        std::size_t flips = 0;
        const std::size_t max_flips = 8 * tris_.size() * tris_.size() + 64;
        while (!queue.empty()) {
            if (stalled > queue.size() || flips > max_flips) return false;
            const auto [u, v] = queue.front();
            queue.pop_front();
            if (constrained.count(undirected_key(u, v))) return false;
            const auto fwd = edge_owner_.find(edge_key(u, v));
            const auto bwd = edge_owner_.find(edge_key(v, u));
            if (fwd == edge_owner_.end() || bwd == edge_owner_.end()) return false;
            const int i = fwd->second;
            const int j = bwd->second;
            const int w = opposite(tris_[i], u, v);
            const int x = opposite(tris_[j], v, u);
            if (orient2d(pts_[u], pts_[x], pts_[w]) <= 0.0 || orient2d(pts_[x], pts_[v], pts_[w]) <= 0.0) {
                queue.emplace_back(u, v);
                ++stalled;
                continue;
            }
            set_tri(i, {u, x, w});
            set_tri(j, {x, v, w});
            stalled = 0;
            ++flips;
            if (crosses(w, x)) queue.emplace_back(std::min(w, x), std::max(w, x));
        }
        return has_edge(a, b);
    }

    static int opposite(const Tri& t, int u, int v) {
        for (int k : t)
            if (k != u && k != v) return k;
        return -1;
    }

    int add_tri(const Tri& t) {
        const int id = static_cast<int>(tris_.size());
        tris_.push_back(t);
        for (int e = 0; e < 3; ++e) edge_owner_[edge_key(t[e], t[(e + 1) % 3])] = id;
        return id;
    }

    void set_tri(int id, const Tri& t) {
        const Tri old = tris_[id];
        for (int e = 0; e < 3; ++e) {
            const auto it = edge_owner_.find(edge_key(old[e], old[(e + 1) % 3]));
            if (it != edge_owner_.end() && it->second == id) edge_owner_.erase(it);
        }
        tris_[id] = t;
        for (int e = 0; e < 3; ++e) edge_owner_[edge_key(t[e], t[(e + 1) % 3])] = id;
    }

    void split_interior(int id, int p) {
        const Tri t = tris_[id];
        set_tri(id, {t[0], t[1], p});
        add_tri({t[1], t[2], p});
        add_tri({t[2], t[0], p});
    }

    void split_edge(int id, int edge, int p) {
        const Tri t = tris_[id];
        const int u = t[edge];
        const int v = t[(edge + 1) % 3];
        const int w = t[(edge + 2) % 3];
        const auto twin = edge_owner_.find(edge_key(v, u));
        if (twin == edge_owner_.end()) {
            // Outer boundary: put the point exactly on the edge.
            const Point2 a = pts_[u];
            const Point2 b = pts_[v];
            const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
            double s = ((pts_[p].x - a.x) * (b.x - a.x) + (pts_[p].y - a.y) * (b.y - a.y)) / len2;
            s = std::clamp(s, 0.0, 1.0);
            pts_[p] = {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
            set_tri(id, {u, p, w});
            add_tri({p, v, w});
            return;
        }
        const int nb = twin->second;
        const int x = opposite(tris_[nb], u, v);
        set_tri(id, {u, p, w});
        add_tri({p, v, w});
        set_tri(nb, {v, p, x});
        add_tri({p, u, x});
    }

    std::vector<Point2>& pts_;
    double tol_;
    std::vector<Tri> tris_;
    std::unordered_map<std::uint64_t, int> edge_owner_;  // directed edge -> triangle
};

// Clamps p into the outer triangle and snaps it onto any edge within tol.
Point2 clamp_into(const std::array<Point2, 3>& outer, const Point2& p, double tol) {
    const double area = orient2d(outer[0], outer[1], outer[2]);
    std::array<double, 3> bary{orient2d(outer[1], outer[2], p) / area,
                               orient2d(outer[2], outer[0], p) / area,
                               orient2d(outer[0], outer[1], p) / area};
    bool changed = false;
    for (int i = 0; i < 3; ++i) {
        const Point2& e0 = outer[(i + 1) % 3];
        const Point2& e1 = outer[(i + 2) % 3];
        const double height = area / std::max(length(e0, e1), 1e-300);
        if (bary[i] * height <= tol) {
            bary[i] = 0.0;
            changed = true;
        }
    }
    if (!changed) return p;
    const double sum = bary[0] + bary[1] + bary[2];
    if (!(sum > 0.0)) return outer[0];
    for (double& b : bary) b /= sum;
    return {bary[0] * outer[0].x + bary[1] * outer[1].x + bary[2] * outer[2].x,
            bary[0] * outer[0].y + bary[1] * outer[1].y + bary[2] * outer[2].y};
}

int find_or_add(std::vector<Point2>& pts, const Point2& p, double tol) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
        if (length(pts[i], p) <= tol) return i;
    pts.push_back(p);
    return static_cast<int>(pts.size()) - 1;
}

}  // namespace

double orient2d(const Point2& a, const Point2& b, const Point2& c) {
    const double left = (b.x - a.x) * (c.y - a.y);
    const double right = (b.y - a.y) * (c.x - a.x);
    const double det = left - right;
    // Bound on the rounding error of the expression above.
    const double bound = 3.3306690738754716e-16 * (std::abs(left) + std::abs(right));
    if (std::abs(det) > bound) return det;
    return orient2d_exact(a, b, c);
}

ConstrainedTriangulation triangulate_constrained(const std::array<Point2, 3>& outer,
                                                 std::span<const Point2> points,
                                                 std::span<const std::pair<int, int>> constraints,
                                                 double tol) {
    if (!(orient2d(outer[0], outer[1], outer[2]) > 0.0))
        throw TriangulationError("outer triangle must be counter-clockwise with positive area");

    ConstrainedTriangulation out;
    std::vector<Point2>& pts = out.points;
    pts.assign(outer.begin(), outer.end());
    out.input_to_point.reserve(points.size());
    for (const Point2& p : points) out.input_to_point.push_back(find_or_add(pts, clamp_into(outer, p, tol), tol));

    auto resolve = [&](int id) {
        if (id < 0 || id >= 3 + static_cast<int>(points.size()))
            throw TriangulationError("constraint endpoint out of range");
        return id < 3 ? id : out.input_to_point[static_cast<std::size_t>(id - 3)];
    };
    std::vector<std::pair<int, int>> segs;
    {
        std::unordered_set<std::uint64_t> seen;
        for (const auto& [i, j] : constraints) {
            const int a = resolve(i);
            const int b = resolve(j);
            if (a != b && seen.insert(undirected_key(a, b)).second) segs.emplace_back(a, b);
        }
    }

    // Points where constraints cross each other.
    const std::size_t base_segs = segs.size();
    for (std::size_t i = 0; i < base_segs; ++i) {
        for (std::size_t j = i + 1; j < base_segs; ++j) {
            const auto [a, b] = segs[i];
            const auto [c, d] = segs[j];
            if (a == c || a == d || b == c || b == d) continue;
            if (!segments_cross(pts[a], pts[b], pts[c], pts[d])) continue;
            const double o1 = orient2d(pts[c], pts[d], pts[a]);
            const double o2 = orient2d(pts[c], pts[d], pts[b]);
            const double s = o1 / (o1 - o2);
            const Point2 x{pts[a].x + s * (pts[b].x - pts[a].x), pts[a].y + s * (pts[b].y - pts[a].y)};
            find_or_add(pts, clamp_into(outer, x, tol), tol);
        }
    }

    // Split every constraint at the points lying on it.
    std::vector<std::pair<int, int>> pieces;
    std::unordered_set<std::uint64_t> constrained;
    for (const auto& [a, b] : segs) {
        const double len = length(pts[a], pts[b]);
        std::vector<std::pair<double, int>> on_segment;
        for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
            if (k == a || k == b) continue;
            const double s = ((pts[k].x - pts[a].x) * (pts[b].x - pts[a].x) +
                              (pts[k].y - pts[a].y) * (pts[b].y - pts[a].y)) / (len * len);
            if (s * len <= tol || (1.0 - s) * len <= tol) continue;
            if (std::abs(line_distance(pts[a], pts[b], pts[k])) <= 2.0 * tol) on_segment.emplace_back(s, k);
        }
        std::sort(on_segment.begin(), on_segment.end());
        int prev = a;
        for (const auto& [s, k] : on_segment) {
            if (constrained.insert(undirected_key(prev, k)).second) pieces.emplace_back(prev, k);
            prev = k;
        }
        if (constrained.insert(undirected_key(prev, b)).second) pieces.emplace_back(prev, b);
    }

    Triangulation tri(pts, tol);
    std::vector<int> alias(pts.size());
    for (int i = 0; i < 3; ++i) alias[i] = i;
    for (int p = 3; p < static_cast<int>(pts.size()); ++p) alias[p] = tri.insert(p);

    // Points merged during insertion redirect their constraints.
    std::unordered_set<std::uint64_t> final_constrained;
    for (auto& [a, b] : pieces) {
        a = alias[a];
        b = alias[b];
        if (a != b) tri.recover(a, b, final_constrained);
    }
    for (int& id : out.input_to_point) id = alias[id];

    const double scale = std::max({length(outer[0], outer[1]), length(outer[1], outer[2]), length(outer[2], outer[0])});
    tri.make_delaunay(final_constrained, scale);

    out.triangles = tri.triangles();
    double sum = 0.0;
    for (const Tri& t : out.triangles) {
        const double a = orient2d(pts[t[0]], pts[t[1]], pts[t[2]]);
        if (!(a > 0.0)) throw TriangulationError("triangulation produced a non-positive triangle");
        sum += a;
    }
    const double total = orient2d(outer[0], outer[1], outer[2]);
    if (std::abs(sum - total) > 1e-9 * total)
        throw TriangulationError("triangulation does not cover the face (area " + std::to_string(sum) +
                                 " vs " + std::to_string(total) + ")");
    return out;
}

}  // namespace meshmend

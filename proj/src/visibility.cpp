#include "meshmend/visibility.hpp"

#include <cmath>
#include <numbers>

#include "meshmend/cleanup.hpp"
#include "meshmend/error.hpp"
#include "meshmend/parallel.hpp"

namespace meshmend {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1). Done by hand because std::uniform_real_distribution
// output is not specified bit-for-bit across standard libraries.
double unit_double(RayStream& s) { return static_cast<double>(s() >> 11) * 0x1.0p-53; }

// Orthonormal pair spanning the plane orthogonal to unit vector n.
void tangent_frame(const Vec3& n, Vec3& t1, Vec3& t2) {
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    t1 = normalized(cross(n, helper));
    t2 = cross(n, t1);
}

template <class Count>
std::vector<VisibilityTally> tally(const Mesh& mesh, const RaySamplingPlan& plan,
                                   Count&& count_sides) {
    plan.validate();
    const auto budgets = face_ray_budgets(mesh, plan);
    std::vector<VisibilityTally> out(mesh.faces.size());
    parallel_for(mesh.faces.size(), plan.workers, [&](std::size_t i) {
        const Index f = static_cast<Index>(i);
        RayStream stream = face_stream(plan.seed, f);
        out[i].budget = budgets[i];
        if (!(squared_norm(mesh.face_normal(f)) > 0.0)) return;  // no side to shoot from
        for (const SampledRay& r : sample_face_rays(mesh, f, budgets[i], stream, plan))
            count_sides(r, f, out[i]);
    }, 1);
    return out;
}

}  // namespace

void RaySamplingPlan::validate() const {
    if (rays_min == 0) throw PreconditionError("rays_min must be positive");
    if (!(inner_threshold >= 0.0 && inner_threshold <= 1.0))
        throw PreconditionError("inner_threshold must lie in [0, 1]");
    if (!(origin_offset > 0.0) || !std::isfinite(origin_offset))
        throw PreconditionError("origin_offset must be positive");
    if (!(t_min >= 0.0) || !std::isfinite(t_min)) throw PreconditionError("t_min must be non-negative");
    if (!(grazing_angle_deg >= 0.0 && grazing_angle_deg < 90.0))
        throw PreconditionError("grazing_angle_deg must lie in [0, 90)");
}

std::size_t face_ray_budget(double area, double total_area, const RaySamplingPlan& plan) {
    double share = 0.0;
    if (total_area > 0.0) share = area / total_area * static_cast<double>(plan.rays_total);
    const auto proportional = static_cast<std::size_t>(std::floor(share + 0.5));
    return std::max(proportional, plan.rays_min);
}

std::vector<std::size_t> face_ray_budgets(const Mesh& mesh, const RaySamplingPlan& plan) {
    const FaceAreas areas = compute_face_areas(mesh);
    std::vector<std::size_t> out(mesh.faces.size());
    for (std::size_t f = 0; f < out.size(); ++f) out[f] = face_ray_budget(areas.areas[f], areas.total, plan);
    return out;
}

RayStream face_stream(std::uint64_t seed, Index face) {
    const std::uint64_t key = splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(face) + 1));
    return RayStream(key);
}

std::vector<SampledRay> sample_face_rays(const Mesh& mesh, Index face, std::size_t n, RayStream& stream,
                                         const RaySamplingPlan& plan) {
    const auto [a, b, c] = mesh.corners(face);
    const Vec3 raw = cross(b - a, c - a);
    if (!(squared_norm(raw) > 0.0)) throw DegenerateGeometryError("cannot sample rays from a face without area");
    const Vec3 normal = normalized(raw);
    Vec3 t1, t2;
    tangent_frame(normal, t1, t2);
    const double min_cos = std::sin(plan.grazing_angle_deg * std::numbers::pi / 180.0);

    std::vector<SampledRay> out;
    out.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        double r1 = unit_double(stream);
        double r2 = unit_double(stream);
        if (r1 + r2 > 1.0) {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        const Vec3 p = a + (b - a) * r1 + (c - a) * r2;

        // Uniform on the hemisphere: cos(theta) is uniform on [0, 1].
        double z = 0.0;
        do {
            z = 1.0 - unit_double(stream);  // (0, 1]
        } while (z < min_cos);
        const double phi = 2.0 * std::numbers::pi * unit_double(stream);
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 d = t1 * (s * std::cos(phi)) + t2 * (s * std::sin(phi)) + normal * z;

        out.push_back({Ray{p + normal * plan.origin_offset, d}, RaySide::Front});
        out.push_back({Ray{p - normal * plan.origin_offset, -d}, RaySide::Back});
    }
    return out;
}

std::vector<VisibilityTally> tally_both_sides(const Mesh& mesh, const AabbTree& tree, const RaySamplingPlan& plan) {
    return tally(mesh, plan, [&](const SampledRay& r, Index f, VisibilityTally& t) {
        if (!ray_escapes(tree, mesh, r.ray, f, plan.t_min)) return;
        if (r.side == RaySide::Front)
            ++t.front;
        else
            ++t.back;
    });
}

std::vector<VisibilityTally> tally_front(const Mesh& mesh, const AabbTree& tree, const RaySamplingPlan& plan) {
    return tally(mesh, plan, [&](const SampledRay& r, Index f, VisibilityTally& t) {
        if (r.side == RaySide::Front && ray_escapes(tree, mesh, r.ray, f, plan.t_min)) ++t.front;
    });
}

OrientationResult correct_orientation(const Mesh& mesh, const RaySamplingPlan& plan) {
    OrientationResult out;
    out.mesh = mesh;
    if (mesh.faces.empty()) return out;
    const AabbTree tree(mesh);
    out.tallies = tally_both_sides(mesh, tree, plan);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (out.tallies[f].front < out.tallies[f].back) {
            out.mesh.faces[f] = flipped(mesh.faces[f]);
            out.flipped.push_back(static_cast<Index>(f));
        }
    }
    return out;
}

bool is_inner(const VisibilityTally& tally, double inner_threshold) {
    return static_cast<double>(tally.front) < inner_threshold * static_cast<double>(tally.budget);
}

InnerFaceResult remove_inner_faces(const Mesh& mesh, const RaySamplingPlan& plan) {
    InnerFaceResult out;
    out.mesh = mesh;
    if (mesh.faces.empty()) return out;
    const AabbTree tree(mesh);
    out.tallies = tally_front(mesh, tree, plan);
    std::vector<bool> remove(mesh.faces.size(), false);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (is_inner(out.tallies[f], plan.inner_threshold)) {
            remove[f] = true;
            out.removed_faces.push_back(static_cast<Index>(f));
        }
    }
    if (out.removed_faces.empty()) return out;

    // Count the vertices this removal orphans; remove_isolated_vertices also
    // drops any that were unreferenced already.
    std::vector<bool> used_before(mesh.vertices.size(), false);
    for (const Face& face : mesh.faces)
        for (Index v : face) used_before[v] = true;
    Mesh kept = remove_faces(mesh, remove).mesh;
    std::vector<bool> used_after(mesh.vertices.size(), false);
    for (const Face& face : kept.faces)
        for (Index v : face) used_after[v] = true;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (used_before[v] && !used_after[v]) ++out.removed_vertex_count;

    out.mesh = remove_isolated_vertices(kept).mesh;
    return out;
}

}  // namespace meshmend

// Ray-cast visibility voting over mesh faces.
//
// Every face gets a ray budget proportional to its share of the total
// surface area, floored at a per-face minimum:
//
//     n_i = max(round(s_i / S * rays_total), rays_min)
//
// Rays leave from uniformly sampled points on the face, offset slightly off
// the plane, in directions drawn uniformly over the hemisphere of the side
// being tested. A ray "escapes" when it hits no other face. Two decisions are
// built on the escape counts:
//
//  * orientation: a face is flipped when fewer rays escape from its front
//    than from its back;
//  * inner faces: a face is deleted when fewer than inner_threshold * n_i of
//    its front rays escape.
//
// Each face draws from its own random stream keyed by (seed, face index), so
// results do not depend on the number of worker threads.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "meshmend/mesh.hpp"
#include "meshmend/spatial.hpp"

namespace meshmend {

struct RaySamplingPlan {
    std::size_t rays_total = 200'000;
    std::size_t rays_min = 100;
    double inner_threshold = 0.05;
    double origin_offset = 1e-5;
    double t_min = kDefaultRayTMin;
    double grazing_angle_deg = 1.0;  // directions closer than this to the face plane are redrawn
    std::uint64_t seed = 0;
    unsigned workers = 0;

    // Throws PreconditionError when a field is out of range.
    void validate() const;
};

// n_i = max(round_half_up(area / total_area * rays_total), rays_min).
std::size_t face_ray_budget(double area, double total_area, const RaySamplingPlan& plan);
std::vector<std::size_t> face_ray_budgets(const Mesh& mesh, const RaySamplingPlan& plan);

using RayStream = std::mt19937_64;

// Stream for one face; a pure function of (seed, face).
RayStream face_stream(std::uint64_t seed, Index face);

enum class RaySide { Front, Back };

struct SampledRay {
    Ray ray;
    RaySide side;
};

// n base samples, each yielding a front ray and a back ray (in that order):
// the origin is a uniform point on the face pushed origin_offset along +n
// (front) or -n (back); the front direction is uniform on the +n hemisphere
// with grazing directions rejected, and the back direction is its mirror.
// Throws DegenerateGeometryError for a face without area.
std::vector<SampledRay> sample_face_rays(const Mesh& mesh, Index face, std::size_t n, RayStream& stream,
                                         const RaySamplingPlan& plan);

struct VisibilityTally {
    std::size_t budget = 0;  // n_i
    std::size_t front = 0;   // escaping front rays
    std::size_t back = 0;    // escaping back rays; unused by inner-face voting
};

// Escape counts for both sides of every face. Faces without area get their
// budget recorded but cast no rays.
std::vector<VisibilityTally> tally_both_sides(const Mesh& mesh, const AabbTree& tree, const RaySamplingPlan& plan);
// Escape counts for the front side only.
std::vector<VisibilityTally> tally_front(const Mesh& mesh, const AabbTree& tree, const RaySamplingPlan& plan);

struct OrientationResult {
    Mesh mesh;
    std::vector<Index> flipped;  // ascending
    std::vector<VisibilityTally> tallies;
    std::size_t flipped_count() const { return flipped.size(); }
};

// Flips (p1, p2, p3) -> (p1, p3, p2) where front escapes < back escapes.
OrientationResult correct_orientation(const Mesh& mesh, const RaySamplingPlan& plan);

struct InnerFaceResult {
    Mesh mesh;
    std::vector<Index> removed_faces;     // ascending, input face indices
    std::size_t removed_vertex_count = 0;  // vertices orphaned by the removal
    std::vector<VisibilityTally> tallies;
    std::size_t removed_count() const { return removed_faces.size(); }
};

// True when the tally marks an inner face: front < inner_threshold * budget.
bool is_inner(const VisibilityTally& tally, double inner_threshold);

// Deletes faces whose front escapes fall below inner_threshold * n_i, then
// drops vertices no longer referenced.
InnerFaceResult remove_inner_faces(const Mesh& mesh, const RaySamplingPlan& plan);

}  // namespace meshmend

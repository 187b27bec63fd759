#pragma once

// Contour error measured along rays v_i leaving a centre point: the mean
// absolute depth error of the estimated intercepts (MADE) and their mean
// Euclidean distance to the true intercepts (ED).

#include <cstdint>
#include <optional>
#include <vector>

#include "tdepth/geometry.hpp"
#include "tdepth/oracle.hpp"
#include "tdepth/parallel.hpp"

namespace tdepth {

struct MetricRays {
    Vector center;
    DirectionSetPtr directions;

    std::size_t size() const { return directions->size(); }
};

/// 10^3 rays for p <= 3, 10^4 above.
std::size_t default_ray_count(int dim);

MetricRays make_metric_rays(Vector center, std::size_t count, std::uint64_t seed);

/// Per-level errors, their mean, and how many (ray, level) pairs were dropped
/// because the envelope is unbounded along the ray.
struct LevelErrors {
    std::vector<double> per_alpha;
    double mean = 0.0;
    std::size_t unbounded = 0;
};

struct ErrorReport {
    std::vector<double> alphas;
    std::vector<double> made_per_alpha;
    double made = 0.0;
    std::vector<double> ed_per_alpha;
    double ed = 0.0;
    std::size_t unbounded = 0;
};

/// Signed exit distances of every ray for every level: result(i, k) is the t
/// with center + t v_i on the boundary of envelope k, NaN when unbounded.
///
/// The centre need not lie inside the estimate: a tracked estimate can lag
/// behind the true centre, and the formula then still returns the outer
/// boundary crossing of the line.
Matrix envelope_ray_distances(const DepthSnapshot& snapshot, const MetricRays& rays,
                              Exec exec = Exec::parallel);

LevelErrors compute_made(const DepthSnapshot& snapshot, const DepthFunction& truth,
                         const MetricRays& rays, Exec exec = Exec::parallel);

/// Requires rays.center == model mean (true contours are rays from the mean).
LevelErrors compute_ed(const DepthSnapshot& snapshot, const GaussianModel& truth,
                       const MetricRays& rays, Exec exec = Exec::parallel);

/// MADE and ED together against a Gaussian truth.
ErrorReport evaluate_gaussian(const DepthSnapshot& snapshot, const GaussianModel& truth,
                              const MetricRays& rays, Exec exec = Exec::parallel);

/// ED between two snapshots with b's intercepts playing the truth; symmetric.
/// Both snapshots share `center` (ray origin).
LevelErrors ed_between_snapshots(const DepthSnapshot& a, const DepthSnapshot& b,
                                 const Vector& center, const MetricRays& rays,
                                 Exec exec = Exec::parallel);

/// Variant with one ray origin per snapshot (rays re-centred on each estimate).
LevelErrors ed_between_snapshots(const DepthSnapshot& a, const DepthSnapshot& b,
                                 const Vector& center_a, const Vector& center_b,
                                 const MetricRays& rays, Exec exec = Exec::parallel);

/// Shared-ray variant for the change detector: rays.center is ignored and the
/// precomputed U'V products (n_u x n_v) of the common direction set are reused.
class SnapshotDistance {
public:
    SnapshotDistance(DirectionSetPtr envelope_directions, DirectionSetPtr ray_directions);

    /// Same value as ed_between_snapshots(a, b, center, rays) for snapshots over
    /// the direction set given at construction.
    LevelErrors operator()(const DepthSnapshot& a, const DepthSnapshot& b, const Vector& center) const;

private:
    DirectionSetPtr envelope_directions_;
    DirectionSetPtr ray_directions_;
    Matrix cos_;  // u_i' v_j
};

}  // namespace tdepth

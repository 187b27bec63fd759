#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tdepth/parallel.hpp"

namespace tdepth {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Unit vectors on the sphere in R^p, stored one per column.
class DirectionSet {
public:
    DirectionSet() = default;

    /// Normalises nothing: columns must already be unit length (1e-12), else InputError.
    explicit DirectionSet(Matrix vectors);

    int dim() const { return static_cast<int>(vectors_.rows()); }
    std::size_t size() const { return static_cast<std::size_t>(vectors_.cols()); }
    auto operator[](std::size_t i) const { return vectors_.col(static_cast<Eigen::Index>(i)); }
    const Matrix& matrix() const { return vectors_; }

    /// Fewer than p+1 directions can never bound an envelope.
    bool can_bound() const { return size() >= static_cast<std::size_t>(dim()) + 1; }

    bool operator==(const DirectionSet& other) const { return vectors_ == other.vectors_; }

private:
    Matrix vectors_;
};

using DirectionSetPtr = std::shared_ptr<const DirectionSet>;

/// Z/|Z| with Z standard normal, deterministic in `seed`.
DirectionSet sample_uniform_directions(int dim, std::size_t count, std::uint64_t seed);

/// Greedy thinning to `target_count` directions that are as far apart as possible.
///
/// Binary-searches the largest angular threshold at which greedy acceptance in
/// candidate order still keeps at least `target_count` vectors, then returns
/// the first `target_count` accepted ones.
DirectionSet equidistant_filter(const DirectionSet& candidates, std::size_t target_count);

/// Smallest angle (radians) between any two vectors of the set; pi for a single vector.
double min_pairwise_angle(const DirectionSet& set);

/// Intersection of the halfspaces {x : u_i' x >= q_i}.
struct Envelope {
    DirectionSetPtr directions;
    Vector quantiles;
    double alpha = 0.0;

    int dim() const { return directions->dim(); }
    std::size_t size() const { return directions->size(); }
};

/// Membership test; `tolerance` is an absolute slack on each halfspace.
bool envelope_contains(const Envelope& env, const Vector& point, double tolerance = 0.0);

/// Distance t* along `direction` at which the line center + t*direction leaves
/// the envelope, i.e. min over {i : u_i'd < 0} of (q_i - u_i'c)/(u_i'd).
/// std::nullopt when no halfspace opposes the direction (unbounded).
/// No containment check: t* is negative when the envelope lies behind `center`.
std::optional<double> line_exit_distance(const Envelope& env, const Vector& center,
                                         const Vector& direction);

/// Boundary point hit by the ray from `center` (inside the envelope) along the
/// unit vector `direction`; std::nullopt when the ray never leaves.
/// Throws PreconditionError if `center` is outside, InputError on dimension mismatch.
std::optional<Vector> ray_envelope_intercept(const Envelope& env, const Vector& center,
                                             const Vector& direction);

/// K nested envelope estimates over one direction set.
class DepthSnapshot {
public:
    DepthSnapshot() = default;

    /// `quantiles` is n_u x K (column k belongs to alphas[k]). Throws InputError
    /// unless alphas increase strictly and every row is non-decreasing.
    DepthSnapshot(DirectionSetPtr directions, std::vector<double> alphas, Matrix quantiles,
                  std::uint64_t timestamp);

    std::size_t levels() const { return alphas_.size(); }
    int dim() const { return directions_->dim(); }
    const std::vector<double>& alphas() const { return alphas_; }
    const DirectionSetPtr& directions() const { return directions_; }
    const Matrix& quantiles() const { return quantiles_; }
    std::uint64_t timestamp() const { return timestamp_; }
    const Envelope& envelope(std::size_t k) const { return envelopes_[k]; }
    const std::vector<Envelope>& envelopes() const { return envelopes_; }

    bool operator==(const DepthSnapshot& other) const;

private:
    DirectionSetPtr directions_;
    std::vector<double> alphas_;
    Matrix quantiles_;
    std::vector<Envelope> envelopes_;
    std::uint64_t timestamp_ = 0;
};

/// Largest alpha_k whose envelope contains `point`, else 0. Scans from the
/// deepest level outwards and leaves each level at its first violated halfspace.
double point_depth_query(const DepthSnapshot& snapshot, const Vector& point);

/// Exhaustive O(n_u K) evaluation of the same quantity; kept as the oracle.
double point_depth_scan(const DepthSnapshot& snapshot, const Vector& point);

/// Batch form of point_depth_query over the columns of `points` (p x m).
std::vector<double> point_depth_batch(const DepthSnapshot& snapshot, const Matrix& points,
                                      Exec exec = Exec::parallel);

/// `resolution` boundary points of a planar envelope, taken by casting rays
/// from `center` at angles 2*pi*j/resolution. Throws StateError if any ray is unbounded.
std::vector<Eigen::Vector2d> contour_polyline_2d(const Envelope& env, int resolution,
                                                 const Vector& center);

}  // namespace tdepth

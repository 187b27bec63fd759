#pragma once

// Streaming estimator of nested Tukey depth regions. Each direction u_i keeps
// a joint incremental estimate of the alpha_k-quantiles of u_i'X; the region
// for alpha_k is the intersection of the halfspaces u_i'x >= q_ik.

#include <cstdint>
#include <vector>

#include "tdepth/geometry.hpp"
#include "tdepth/parallel.hpp"
#include "tdepth/quantile.hpp"

namespace tdepth {

enum class DirectionMode { uniform, equidistant };

struct TrackerConfig {
    int dim = 2;
    std::vector<double> alphas{0.05, 0.2, 0.4};
    std::size_t n_u = 50;
    DirectionMode direction_mode = DirectionMode::uniform;
    /// Equidistant mode filters candidate_factor * n_u uniform candidates.
    std::size_t candidate_factor = 10;
    StepSchedule schedule = StepSchedule::decay();
    std::uint64_t seed = 1;
    /// Observations buffered to initialise estimates and offsets.
    std::size_t warmup = 10;
    /// Offset = -min + offset_scale * (max - min) of the warm-up projections.
    double offset_scale = 2.0;
    Exec exec = Exec::parallel;

    void validate() const;
};

/// Directions for a config: uniform, or uniform candidates thinned by equidistant_filter.
DirectionSet make_directions(const TrackerConfig& config);

class DepthTracker {
public:
    /// Throws ParameterError on an invalid config.
    explicit DepthTracker(TrackerConfig config);

    /// Reuses an existing direction set (must match config.dim).
    DepthTracker(TrackerConfig config, DirectionSetPtr directions);

    /// Consumes one observation. Throws InputError (state unchanged) on a
    /// dimension mismatch or non-finite entry.
    void observe(const Vector& x);

    bool ready() const { return ready_; }
    std::uint64_t observations() const { return n_; }
    std::size_t buffered() const { return buffered_; }

    /// Total per-direction joint updates performed (n_u per post-warm-up observation).
    std::uint64_t direction_updates() const { return direction_updates_; }

    /// Copy of the current envelopes. Throws StateError during warm-up.
    DepthSnapshot snapshot() const;

    /// n_u x K current estimates in data coordinates.
    Matrix estimates() const;
    const Vector& offsets() const { return offsets_; }

    const TrackerConfig& config() const { return config_; }
    const DirectionSetPtr& directions() const { return directions_; }
    const StepSchedule& schedule() const { return schedule_; }

private:
    void finish_warmup();

    TrackerConfig config_;
    DirectionSetPtr directions_;
    StepSchedule schedule_;
    Matrix buffer_;  // dim x warmup
    std::size_t buffered_ = 0;
    bool ready_ = false;
    // Row-major so each direction's K estimates are contiguous.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> shifted_;
    Vector offsets_;
    Vector projections_;
    std::uint64_t n_ = 0;
    std::uint64_t direction_updates_ = 0;
};

DepthTracker init_tracker(const TrackerConfig& config);

/// Estimated depth of `point`: the deepest alpha level containing it, or 0.
double estimate_depth(const DepthSnapshot& snapshot, const Vector& point);

}  // namespace tdepth

#pragma once

// Plain serial implementations of the hot kernels. They follow the textbook
// definitions one element at a time and exist so tests and the benchmark can
// check the vectorised/OpenMP paths against them.

#include <vector>

#include "tdepth/depth_tracker.hpp"
#include "tdepth/metrics.hpp"
#include "tdepth/oracle.hpp"

namespace tdepth::reference {

/// Tracker built from one JointQuantileState per direction.
class Tracker {
public:
    Tracker(TrackerConfig config, DirectionSetPtr directions);

    void observe(const Vector& x);
    bool ready() const { return ready_; }
    DepthSnapshot snapshot() const;

private:
    TrackerConfig config_;
    DirectionSetPtr directions_;
    StepSchedule schedule_;
    std::vector<Vector> buffer_;
    std::vector<JointQuantileState> states_;
    bool ready_ = false;
    std::uint64_t n_ = 0;
};

/// One ray at a time through line_exit_distance.
LevelErrors made(const DepthSnapshot& snapshot, const DepthFunction& truth, const MetricRays& rays);

/// Double loop over directions and samples.
double mc_depth(const Matrix& samples, const Vector& w, const DirectionSet& directions);

/// Type 8 quantiles of each direction's projections (n_u x K).
Matrix offline_quantiles(const Matrix& data, const DirectionSet& directions,
                         const std::vector<double>& alphas);

}  // namespace tdepth::reference

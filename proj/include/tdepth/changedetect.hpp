#pragma once

// Change detection on depth-contour drift:
//  1. track the contours with a floored 1/t schedule,
//  2. ED_t = distance between the current contours and those h observations back,
//  3. exponential moving mean and second moment of ED_t,
//  4. flag a change when ED_t >= mean + eta * sd,
//  5. restart everything after a flag.

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "tdepth/depth_tracker.hpp"
#include "tdepth/metrics.hpp"

namespace tdepth {

struct DetectorParams {
    int dim = 3;
    std::vector<double> alphas{0.01, 0.05, 0.2};
    std::size_t n_u = 20;
    DirectionMode direction_mode = DirectionMode::uniform;
    double lambda_min = 0.01;
    /// EMA weight of the ED statistic and of the running centre.
    double delta = 0.01;
    /// Lookback in observations.
    std::size_t h = 100;
    double eta = 8.0;
    /// Snapshot thinning: one snapshot (and one ED_t) every `thin` observations.
    std::size_t thin = 5;
    std::size_t warmup = 10;
    /// Observations after a (re)start during which no change is flagged; 0 means h + warmup.
    std::size_t warmup_mute = 0;
    /// ED_t values folded into the mean and SD before the threshold test is armed.
    std::size_t min_statistic = 10;
    std::size_t n_rays = 0;  ///< 0 means default_ray_count(dim)
    std::uint64_t seed = 1;

    std::size_t mute() const { return warmup_mute ? warmup_mute : h + warmup; }
    void validate() const;
};

struct ChangeEvent {
    std::uint64_t t;
    double ed_value;
    double threshold;
};

/// ED_t >= mean + eta * sd
bool exceeds_threshold(double ed, double mean, double sd, double eta);

/// sqrt(E[ED^2] - E[ED]^2), clamped at zero.
double ema_sd(double mean, double mean_sq);

class ChangeDetector {
public:
    explicit ChangeDetector(DetectorParams params);

    /// Feeds one observation (global index advances by one). Returns the event
    /// when a change is flagged; the detector has then already restarted.
    std::optional<ChangeEvent> observe(const Vector& x);

    const DetectorParams& params() const { return params_; }
    const DepthTracker& tracker() const { return tracker_; }
    std::uint64_t clock() const { return t_; }
    std::uint64_t since_restart() const { return local_t_; }
    double ema_ed() const { return ema_; }
    double ema_ed2() const { return ema2_; }
    bool has_statistic() const { return have_ema_; }
    std::size_t statistic_count() const { return ed_count_; }
    const Vector& center() const { return center_; }
    std::optional<double> last_ed() const { return last_ed_; }
    const std::vector<ChangeEvent>& events() const { return events_; }
    /// ED evaluations skipped because the centre was outside an outer envelope.
    std::size_t skipped() const { return skipped_; }

private:
    void restart();
    TrackerConfig tracker_config() const;

    DetectorParams params_;
    DirectionSetPtr directions_;
    DirectionSetPtr rays_;
    SnapshotDistance distance_;
    DepthTracker tracker_;
    std::deque<DepthSnapshot> ring_;
    Vector center_;
    bool have_center_ = false;
    double ema_ = 0.0;
    double ema2_ = 0.0;
    bool have_ema_ = false;
    std::size_t ed_count_ = 0;
    std::optional<double> last_ed_;
    std::uint64_t t_ = 0;
    std::uint64_t local_t_ = 0;
    std::size_t skipped_ = 0;
    std::vector<ChangeEvent> events_;
};

/// Runs a detector over the columns of `data`; returns event times (1-based indices).
std::vector<ChangeEvent> run_detector(const DetectorParams& params, const Matrix& data);

struct ScoreReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mean_detection_delay = 0.0;
    std::size_t correct = 0;
    std::size_t detections = 0;
    std::size_t true_changes = 0;
};

/// The first detection after each true change (and before the next one) is
/// correct; every other detection is false. Events at or after `horizon` are
/// ignored when horizon > 0.
ScoreReport score_detections(const std::vector<std::uint64_t>& events,
                             const std::vector<std::uint64_t>& truth, std::uint64_t horizon = 0);

}  // namespace tdepth

#pragma once

// Experiment drivers shared by the command-line tool and the acceptance suite:
// offline vs incremental estimation, convergence sweeps, tracking of the
// rotating Gaussian stream, and labelled regime streams for change detection.

#include <cstdint>
#include <string>
#include <vector>

#include "tdepth/changedetect.hpp"
#include "tdepth/depth_tracker.hpp"
#include "tdepth/metrics.hpp"
#include "tdepth/synthdata.hpp"

namespace tdepth {

/// Type 8 quantiles of the projections of `data` (p x N) onto every direction.
DepthSnapshot offline_snapshot(const Matrix& data, const DirectionSetPtr& directions,
                               const std::vector<double>& alphas, Exec exec = Exec::parallel);

/// Feeds every column of `data` to a fresh tracker that uses `directions`.
DepthTracker run_incremental(const Matrix& data, const TrackerConfig& config,
                             const DirectionSetPtr& directions);

enum class Estimator { incremental, offline_type8 };

struct OfflineComparison {
    ErrorReport offline;
    ErrorReport incremental;
    double offline_seconds = 0.0;
    double incremental_seconds = 0.0;
};

struct OfflineSetup {
    int dim = 2;
    std::uint64_t sample_size = 10000;
    std::size_t n_u = 1500;
    std::vector<double> alphas{0.05, 0.2, 0.4};
    double ar_rate = 0.2;
    std::size_t n_rays = 0;
    std::uint64_t seed = 1;
};

/// One seed of the offline experiment: both estimators on the same sample and
/// direction set, scored against the analytic Gaussian truth.
OfflineComparison run_offline_comparison(const OfflineSetup& setup);

struct BenchSetup {
    int dim = 2;
    std::size_t n_u = 8;
    double target = 0.05;
    /// 0 selects the identity covariance, otherwise exp(-rate |i-j|).
    double ar_rate = 0.0;
    std::vector<double> alphas{0.05, 0.2, 0.4};
    std::uint64_t cap = 1000000;
    std::size_t n_rays = 0;
    std::uint64_t seed = 1;
};

struct BenchOutcome {
    bool converged = false;
    std::uint64_t observations = 0;
    double made = 0.0;       ///< at the stopping checkpoint
    double best_made = 0.0;  ///< smallest over all checkpoints
    double seconds = 0.0;    ///< estimation loop only
    double seconds_per_region = 0.0;
    double region_updates_per_ms = 0.0;
    std::size_t unbounded = 0;
};

/// Geometric checkpoints (x1.5 from 100) up to `cap`, cap included.
std::vector<std::uint64_t> bench_checkpoints(std::uint64_t cap);

/// Streams N(0, Sigma) with lambda_n = 1/n until MADE < target at a checkpoint or the cap.
BenchOutcome run_bench_cell(const BenchSetup& setup);

/// Envelope-region updates per millisecond (observations * K / ms) at steady state.
double measure_throughput(int dim, std::size_t n_u, std::size_t levels, std::uint64_t observations,
                          Exec exec = Exec::serial);

struct TrackingSetup {
    int dim = 2;
    double period = 1000.0;
    std::size_t n_u = 25;
    DirectionMode mode = DirectionMode::uniform;
    std::size_t candidate_factor = 10;
    double lambda = 0.05;
    std::vector<double> alphas{0.05, 0.2, 0.4};
    double offset_scale = TrackerConfig{}.offset_scale;
    std::uint64_t periods = 10;
    /// Checkpoints per period; scoring starts after the first period.
    std::uint64_t checkpoints_per_period = 20;
    std::size_t n_rays = 0;
    std::uint64_t seed = 1;
};

struct TrackingPoint {
    std::uint64_t n;
    double made;
    double ed;
};

struct TrackingOutcome {
    double mean_made = 0.0;
    double mean_ed = 0.0;
    std::vector<TrackingPoint> series;
    double seconds = 0.0;
};

/// Constant-step tracking of the rotating Gaussian stream, scored against the
/// moving analytic truth with rays re-centred on the true mean.
TrackingOutcome run_tracking(const TrackingSetup& setup);

struct LambdaScore {
    double lambda;
    double median_made;
    std::vector<double> per_seed;
};

/// Median-over-seeds MADE for every lambda; the result is sorted as the grid.
std::vector<LambdaScore> lambda_grid(TrackingSetup setup, const std::vector<double>& lambdas,
                                     const std::vector<std::uint64_t>& seeds);

const LambdaScore& best_lambda(const std::vector<LambdaScore>& scores);

std::vector<double> default_lambda_grid();

struct LabeledStream {
    Matrix data;                        ///< dim x n
    std::vector<int> labels;            ///< regime id per observation
    std::vector<std::uint64_t> changes; ///< 1-based index of the first observation of each new regime
};

/// Eight 3-D regimes (`per_regime` observations each) that alternately change
/// mean, correlation, scale and shape.
LabeledStream make_regime_stream(std::uint64_t seed, std::size_t per_regime = 2000,
                                 std::size_t regimes = 8);

/// Change points from label transitions (1-based indices).
std::vector<std::uint64_t> label_changes(const std::vector<int>& labels);

/// Detector parameters tuned for make_regime_stream.
DetectorParams regime_detector_params(std::uint64_t seed);

double median(std::vector<double> values);

}  // namespace tdepth

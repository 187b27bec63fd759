#include "tdepth/changedetect.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tdepth/error.hpp"

namespace tdepth {

void DetectorParams::validate() const {
    if (dim < 2) throw ParameterError("detector dimension must be >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
    if (h < 1) throw ParameterError("lookback h must be >= 1");
    if (!(eta > 0.0)) throw ParameterError("eta must be positive");
    if (thin < 1) throw ParameterError("thin must be >= 1");
    if (!(lambda_min >= 0.0 && lambda_min < 1.0)) throw ParameterError("lambda_min must lie in [0,1)");
    if (min_statistic < 1) throw ParameterError("min_statistic must be >= 1");
}

bool exceeds_threshold(double ed, double mean, double sd, double eta) {
    return ed >= mean + eta * sd;
}

double ema_sd(double mean, double mean_sq) { return std::sqrt(std::max(0.0, mean_sq - mean * mean)); }

TrackerConfig ChangeDetector::tracker_config() const {
    TrackerConfig c;
    c.dim = params_.dim;
    c.alphas = params_.alphas;
    c.n_u = params_.n_u;
    c.direction_mode = params_.direction_mode;
    c.schedule = StepSchedule::floored_decay(params_.lambda_min);
    c.seed = params_.seed;
    c.warmup = params_.warmup;
    c.exec = Exec::serial;
    return c;
}

namespace {

DetectorParams checked(DetectorParams p) {
    p.validate();
    return p;
}

}  // namespace

ChangeDetector::ChangeDetector(DetectorParams params)
    : params_(checked(std::move(params))),
      directions_(std::make_shared<const DirectionSet>(make_directions(tracker_config()))),
      rays_(std::make_shared<const DirectionSet>(sample_uniform_directions(
          params_.dim, params_.n_rays ? params_.n_rays : default_ray_count(params_.dim),
          derive_seed(params_.seed, 17)))),
      distance_(directions_, rays_),
      tracker_(tracker_config(), directions_) {}

void ChangeDetector::restart() {
    tracker_ = DepthTracker(tracker_config(), directions_);
    ring_.clear();
    have_center_ = false;
    ema_ = ema2_ = 0.0;
    have_ema_ = false;
    ed_count_ = 0;
    last_ed_.reset();
    local_t_ = 0;
}

std::optional<ChangeEvent> ChangeDetector::observe(const Vector& x) {
    if (x.size() != params_.dim) throw InputError("observation has wrong dimension");
    if (!x.allFinite()) throw InputError("observation contains non-finite values");
    ++t_;
    ++local_t_;

    if (!have_center_) {
        center_ = x;
        have_center_ = true;
    } else {
        center_ = (1.0 - params_.delta) * center_ + params_.delta * x;
    }

    tracker_.observe(x);
    if (!tracker_.ready() || local_t_ % params_.thin != 0) return std::nullopt;

    const std::size_t lag = std::max<std::size_t>(1, (params_.h + params_.thin / 2) / params_.thin);
    ring_.push_back(tracker_.snapshot());
    if (ring_.size() > lag + 1) ring_.pop_front();
    if (ring_.size() < lag + 1) return std::nullopt;

    const DepthSnapshot& now = ring_.back();
    const DepthSnapshot& back = ring_.front();
    if (!envelope_contains(now.envelope(0), center_) || !envelope_contains(back.envelope(0), center_)) {
        ++skipped_;
        return std::nullopt;
    }
    const double ed = distance_(now, back, center_).mean;
    if (std::isnan(ed)) {
        ++skipped_;
        return std::nullopt;
    }
    last_ed_ = ed;

    // Compared against the statistics of the previous steps; folding ED_t in
    // first makes the test unreachable once delta > 1 / (1 + eta^2).
    if (ed_count_ >= params_.min_statistic && local_t_ > params_.mute()) {
        const double sd = ema_sd(ema_, ema2_);
        if (exceeds_threshold(ed, ema_, sd, params_.eta)) {
            ChangeEvent event{t_, ed, ema_ + params_.eta * sd};
            events_.push_back(event);
            restart();
            return event;
        }
    }
    if (!have_ema_) {
        ema_ = ed;
        ema2_ = ed * ed;
        have_ema_ = true;
    } else {
        ema_ = (1.0 - params_.delta) * ema_ + params_.delta * ed;
        ema2_ = (1.0 - params_.delta) * ema2_ + params_.delta * ed * ed;
    }
    ++ed_count_;
    return std::nullopt;
}

std::vector<ChangeEvent> run_detector(const DetectorParams& params, const Matrix& data) {
    ChangeDetector detector(params);
    for (Eigen::Index j = 0; j < data.cols(); ++j) detector.observe(data.col(j));
    return detector.events();
}

ScoreReport score_detections(const std::vector<std::uint64_t>& events,
                             const std::vector<std::uint64_t>& truth, std::uint64_t horizon) {
    if (!std::is_sorted(truth.begin(), truth.end())) throw InputError("true change times must be sorted");
    std::vector<std::uint64_t> sorted_events = events;
    std::sort(sorted_events.begin(), sorted_events.end());

    ScoreReport r;
    r.true_changes = truth.size();
    std::vector<bool> matched(truth.size(), false);
    double delay_sum = 0.0;
    for (std::uint64_t e : sorted_events) {
        if (horizon > 0 && e >= horizon) continue;
        ++r.detections;
        const auto it = std::upper_bound(truth.begin(), truth.end(), e);
        if (it == truth.begin()) continue;
        const auto i = static_cast<std::size_t>(it - truth.begin()) - 1;
        if (matched[i]) continue;
        matched[i] = true;
        ++r.correct;
        delay_sum += static_cast<double>(e - truth[i]);
    }
    if (r.detections > 0) r.precision = static_cast<double>(r.correct) / static_cast<double>(r.detections);
    if (r.true_changes > 0) r.recall = static_cast<double>(r.correct) / static_cast<double>(r.true_changes);
    if (r.precision > 0.0 && r.recall > 0.0) {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    }
    if (r.correct > 0) r.mean_detection_delay = delay_sum / static_cast<double>(r.correct);
    return r;
}

}  // namespace tdepth

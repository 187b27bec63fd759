#include "tdepth/depth_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>

#include "tdepth/error.hpp"

namespace tdepth {

namespace {

// Offset that keeps the shifted estimate positive and proportional to the data spread.
double warmup_offset(double lo, double hi, double scale) {
    const double spread = hi - lo;
    if (spread > 0.0) return -lo + scale * spread;
    return -lo + std::max(std::abs(lo), 1.0);
}

}  // namespace

void TrackerConfig::validate() const {
    if (dim < 2) throw ParameterError("dimension must be >= 2");
    if (n_u < 1) throw ParameterError("n_u must be >= 1");
    if (candidate_factor < 1) throw ParameterError("candidate_factor must be >= 1");
    if (warmup < 1) throw ParameterError("warmup must be >= 1");
    if (!(offset_scale > 0.0)) throw ParameterError("offset_scale must be positive");
    if (alphas.empty()) throw ParameterError("at least one alpha required");
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        if (!(alphas[k] > 0.0 && alphas[k] < 1.0)) throw ParameterError("alphas must lie in (0,1)");
        if (k > 0 && !(alphas[k] > alphas[k - 1])) {
            throw ParameterError("alphas must be strictly increasing");
        }
    }
    schedule.validate();
}

DirectionSet make_directions(const TrackerConfig& config) {
    const std::uint64_t seed = derive_seed(config.seed, 0);
    if (config.direction_mode == DirectionMode::uniform) {
        return sample_uniform_directions(config.dim, config.n_u, seed);
    }
    const DirectionSet candidates =
        sample_uniform_directions(config.dim, config.candidate_factor * config.n_u, seed);
    return equidistant_filter(candidates, config.n_u);
}

DepthTracker::DepthTracker(TrackerConfig config)
    : DepthTracker(config, [&config] {
          config.validate();
          return std::make_shared<const DirectionSet>(make_directions(config));
      }()) {}

DepthTracker::DepthTracker(TrackerConfig config, DirectionSetPtr directions)
    : config_(std::move(config)), directions_(std::move(directions)), schedule_(config_.schedule) {
    config_.validate();
    if (!directions_ || directions_->dim() != config_.dim) {
        throw ParameterError("direction set does not match tracker dimension");
    }
    buffer_.resize(config_.dim, static_cast<Eigen::Index>(config_.warmup));
    projections_.resize(static_cast<Eigen::Index>(directions_->size()));
}

void DepthTracker::observe(const Vector& x) {
    if (x.size() != config_.dim) throw InputError("observation has wrong dimension");
    if (!x.allFinite()) throw InputError("observation contains non-finite values");

    if (!ready_) {
        buffer_.col(static_cast<Eigen::Index>(buffered_++)) = x;
        ++n_;
        if (buffered_ == config_.warmup) finish_warmup();
        return;
    }

    const double step = schedule_.next();
    const std::size_t levels = config_.alphas.size();
    for (double a : config_.alphas) {
        if (step * std::max(a, 1.0 - a) >= 1.0) throw ParameterError("step too large for alpha");
    }

    projections_.noalias() = directions_->matrix().transpose() * x;
    const auto n_u = static_cast<std::ptrdiff_t>(directions_->size());
    const double* alphas = config_.alphas.data();

#pragma omp parallel for schedule(static) if (run_parallel(config_.exec, directions_->size()))
    for (std::ptrdiff_t i = 0; i < n_u; ++i) {
        double* row = shifted_.row(i).data();
        const double s = projections_[i] + offsets_[i];
        bool ordered = true;
        for (std::size_t k = 0; k < levels; ++k) {
            const double q = row[k];
            if (s > q) {
                row[k] = (1.0 + step * alphas[k]) * q;
            } else if (s < q) {
                row[k] = (1.0 - step * (1.0 - alphas[k])) * q;
            }
            if (k > 0 && row[k] < row[k - 1]) ordered = false;
        }
        if (!ordered) restore_order(std::span<double>(row, levels));
    }

    direction_updates_ += directions_->size();
    ++n_;
}

void DepthTracker::finish_warmup() {
    const auto n_u = static_cast<Eigen::Index>(directions_->size());
    const auto levels = static_cast<Eigen::Index>(config_.alphas.size());
    const auto w = static_cast<Eigen::Index>(config_.warmup);

    Matrix proj(n_u, w);
    for (Eigen::Index j = 0; j < w; ++j) proj.col(j).noalias() = directions_->matrix().transpose() * buffer_.col(j);

    shifted_.resize(n_u, levels);
    offsets_.resize(n_u);
    std::vector<double> sorted(static_cast<std::size_t>(w));
    for (Eigen::Index i = 0; i < n_u; ++i) {
        for (Eigen::Index j = 0; j < w; ++j) sorted[static_cast<std::size_t>(j)] = proj(i, j);
        std::sort(sorted.begin(), sorted.end());
        offsets_[i] = warmup_offset(sorted.front(), sorted.back(), config_.offset_scale);
        for (Eigen::Index k = 0; k < levels; ++k) {
            shifted_(i, k) = type8_sorted(sorted, config_.alphas[static_cast<std::size_t>(k)]) + offsets_[i];
        }
    }
    // Decay schedules continue the observation clock across warm-up.
    schedule_.n = config_.warmup + 1;
    ready_ = true;
    buffer_.resize(0, 0);
}

Matrix DepthTracker::estimates() const {
    if (!ready_) throw StateError("tracker is still warming up");
    return shifted_.colwise() - offsets_;
}

DepthSnapshot DepthTracker::snapshot() const {
    return DepthSnapshot(directions_, config_.alphas, estimates(), n_);
}

DepthTracker init_tracker(const TrackerConfig& config) { return DepthTracker(config); }

double estimate_depth(const DepthSnapshot& snapshot, const Vector& point) {
    return point_depth_query(snapshot, point);
}

}  // namespace tdepth

#include "tdepth/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdepth/error.hpp"

namespace tdepth::reference {

namespace {

double dot(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

Tracker::Tracker(TrackerConfig config, DirectionSetPtr directions)
    : config_(std::move(config)), directions_(std::move(directions)), schedule_(config_.schedule) {
    config_.validate();
}

void Tracker::observe(const Vector& x) {
    if (x.size() != config_.dim || !x.allFinite()) throw InputError("bad observation");
    ++n_;
    if (!ready_) {
        buffer_.push_back(x);
        if (buffer_.size() < config_.warmup) return;
        for (std::size_t i = 0; i < directions_->size(); ++i) {
            std::vector<double> proj;
            for (const Vector& b : buffer_) proj.push_back(dot((*directions_)[i], b));
            const auto [lo, hi] = std::minmax_element(proj.begin(), proj.end());
            const double spread = *hi - *lo;
            const double offset = spread > 0.0 ? -*lo + config_.offset_scale * spread
                                               : -*lo + std::max(std::abs(*lo), 1.0);
            std::vector<double> est;
            for (double a : config_.alphas) est.push_back(offline_quantile_type8(proj, a));
            states_.emplace_back(config_.alphas, est, offset);
        }
        schedule_.n = config_.warmup + 1;
        ready_ = true;
        return;
    }
    const double step = schedule_.next();
    for (std::size_t i = 0; i < directions_->size(); ++i) {
        states_[i].update(dot((*directions_)[i], x), step);
    }
}

DepthSnapshot Tracker::snapshot() const {
    if (!ready_) throw StateError("reference tracker still warming up");
    Matrix q(static_cast<Eigen::Index>(states_.size()), static_cast<Eigen::Index>(config_.alphas.size()));
    for (std::size_t i = 0; i < states_.size(); ++i) {
        for (std::size_t k = 0; k < config_.alphas.size(); ++k) {
            q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = states_[i][k].estimate;
        }
    }
    return DepthSnapshot(directions_, config_.alphas, q, n_);
}

LevelErrors made(const DepthSnapshot& snapshot, const DepthFunction& truth, const MetricRays& rays) {
    LevelErrors out;
    double total = 0.0;
    for (std::size_t k = 0; k < snapshot.levels(); ++k) {
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t j = 0; j < rays.size(); ++j) {
            const Vector v = (*rays.directions)[j];
            const auto t = line_exit_distance(snapshot.envelope(k), rays.center, v);
            if (!t) {
                ++out.unbounded;
                continue;
            }
            sum += std::abs(snapshot.alphas()[k] - truth(rays.center + *t * v));
            ++used;
        }
        const double m = used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
        out.per_alpha.push_back(m);
        total += m;
    }
    out.mean = total / static_cast<double>(snapshot.levels());
    return out;
}

double mc_depth(const Matrix& samples, const Vector& w, const DirectionSet& directions) {
    if (samples.cols() == 0) throw StateError("empty sample");
    double best = 1.0;
    for (std::size_t d = 0; d < directions.size(); ++d) {
        const Vector u = directions[d];
        const double cut = dot(u, w);
        std::size_t below = 0;
        for (Eigen::Index j = 0; j < samples.cols(); ++j) {
            if (dot(u, samples.col(j)) <= cut) ++below;
        }
        best = std::min(best, static_cast<double>(below) / static_cast<double>(samples.cols()));
    }
    return best;
}

Matrix offline_quantiles(const Matrix& data, const DirectionSet& directions,
                         const std::vector<double>& alphas) {
    Matrix q(static_cast<Eigen::Index>(directions.size()), static_cast<Eigen::Index>(alphas.size()));
    std::vector<double> proj(static_cast<std::size_t>(data.cols()));
    for (std::size_t i = 0; i < directions.size(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) proj[static_cast<std::size_t>(j)] = dot(directions[i], data.col(j));
        for (std::size_t k = 0; k < alphas.size(); ++k) {
            q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = offline_quantile_type8(proj, alphas[k]);
        }
    }
    return q;
}

}  // namespace tdepth::reference

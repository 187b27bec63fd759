#include "tdepth/metrics.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "tdepth/error.hpp"

namespace tdepth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Exit distance of every ray (columns of cosines) through every level.
Matrix ray_distances(const Matrix& quantiles, const Matrix& cosines, const Vector& center_proj,
                     Exec exec) {
    const auto n_u = quantiles.rows();
    const auto levels = quantiles.cols();
    const auto n_v = static_cast<std::ptrdiff_t>(cosines.cols());
    Matrix out(n_v, levels);
#pragma omp parallel for schedule(static) if (run_parallel(exec, static_cast<std::size_t>(n_v)))
    for (std::ptrdiff_t j = 0; j < n_v; ++j) {
        for (Eigen::Index k = 0; k < levels; ++k) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n_u; ++i) {
                const double c = cosines(i, j);
                if (c < 0.0) best = std::min(best, (quantiles(i, k) - center_proj[i]) / c);
            }
            out(j, k) = std::isinf(best) ? kNaN : best;
        }
    }
    return out;
}

LevelErrors summarise(const Matrix& errors) {
    LevelErrors out;
    out.per_alpha.resize(static_cast<std::size_t>(errors.cols()));
    for (Eigen::Index k = 0; k < errors.cols(); ++k) {
        double sum = 0.0;
        std::size_t used = 0;
        for (Eigen::Index j = 0; j < errors.rows(); ++j) {
            if (std::isnan(errors(j, k))) {
                ++out.unbounded;
            } else {
                sum += errors(j, k);
                ++used;
            }
        }
        out.per_alpha[static_cast<std::size_t>(k)] = used ? sum / static_cast<double>(used) : kNaN;
    }
    double total = 0.0;
    for (double v : out.per_alpha) total += v;
    out.mean = total / static_cast<double>(out.per_alpha.size());
    return out;
}

void check_rays(const DepthSnapshot& s, const MetricRays& rays) {
    if (!rays.directions) throw InputError("metric rays have no directions");
    if (rays.directions->dim() != s.dim() || rays.center.size() != s.dim()) {
        throw InputError("metric rays and snapshot differ in dimension");
    }
}

}  // namespace

std::size_t default_ray_count(int dim) { return dim <= 3 ? 1000 : 10000; }

MetricRays make_metric_rays(Vector center, std::size_t count, std::uint64_t seed) {
    const int dim = static_cast<int>(center.size());
    return {std::move(center),
            std::make_shared<const DirectionSet>(sample_uniform_directions(dim, count, seed))};
}

Matrix envelope_ray_distances(const DepthSnapshot& snapshot, const MetricRays& rays, Exec exec) {
    check_rays(snapshot, rays);
    const Matrix& u = snapshot.directions()->matrix();
    const Matrix cosines = u.transpose() * rays.directions->matrix();
    const Vector center_proj = u.transpose() * rays.center;
    return ray_distances(snapshot.quantiles(), cosines, center_proj, exec);
}

LevelErrors compute_made(const DepthSnapshot& snapshot, const DepthFunction& truth,
                         const MetricRays& rays, Exec exec) {
    const Matrix t = envelope_ray_distances(snapshot, rays, exec);
    const Matrix& v = rays.directions->matrix();
    Matrix err(t.rows(), t.cols());
    const auto n_v = static_cast<std::ptrdiff_t>(t.rows());
#pragma omp parallel for schedule(dynamic, 16) if (run_parallel(exec, static_cast<std::size_t>(n_v)))
    for (std::ptrdiff_t j = 0; j < n_v; ++j) {
        for (Eigen::Index k = 0; k < t.cols(); ++k) {
            if (std::isnan(t(j, k))) {
                err(j, k) = kNaN;
                continue;
            }
            const Vector w = rays.center + t(j, k) * v.col(j);
            err(j, k) = std::abs(snapshot.alphas()[static_cast<std::size_t>(k)] - truth(w));
        }
    }
    return summarise(err);
}

LevelErrors compute_ed(const DepthSnapshot& snapshot, const GaussianModel& truth,
                       const MetricRays& rays, Exec exec) {
    const Matrix t = envelope_ray_distances(snapshot, rays, exec);
    const Matrix& v = rays.directions->matrix();
    Matrix err(t.rows(), t.cols());
    const auto n_v = static_cast<std::ptrdiff_t>(t.rows());
    // Validates centre == mean and alpha range once, outside the parallel loop.
    for (double a : snapshot.alphas()) {
        (void)mvn_contour_intercept(truth, a, rays.center, v.col(0));
    }
#pragma omp parallel for schedule(static) if (run_parallel(exec, static_cast<std::size_t>(n_v)))
    for (std::ptrdiff_t j = 0; j < n_v; ++j) {
        for (Eigen::Index k = 0; k < t.cols(); ++k) {
            if (std::isnan(t(j, k))) {
                err(j, k) = kNaN;
                continue;
            }
            const Vector w_true = mvn_contour_intercept(
                truth, snapshot.alphas()[static_cast<std::size_t>(k)], rays.center, v.col(j));
            const Vector w_est = rays.center + t(j, k) * v.col(j);
            err(j, k) = (w_true - w_est).norm();
        }
    }
    return summarise(err);
}

ErrorReport evaluate_gaussian(const DepthSnapshot& snapshot, const GaussianModel& truth,
                              const MetricRays& rays, Exec exec) {
    const LevelErrors made = compute_made(snapshot, gaussian_depth_function(truth), rays, exec);
    const LevelErrors ed = compute_ed(snapshot, truth, rays, exec);
    return {snapshot.alphas(), made.per_alpha, made.mean, ed.per_alpha, ed.mean, made.unbounded};
}

LevelErrors ed_between_snapshots(const DepthSnapshot& a, const DepthSnapshot& b,
                                 const Vector& center, const MetricRays& rays, Exec exec) {
    return ed_between_snapshots(a, b, center, center, rays, exec);
}

LevelErrors ed_between_snapshots(const DepthSnapshot& a, const DepthSnapshot& b,
                                 const Vector& center_a, const Vector& center_b,
                                 const MetricRays& rays, Exec exec) {
    if (a.alphas() != b.alphas() || a.dim() != b.dim()) {
        throw InputError("snapshots differ in alphas or dimension");
    }
    const MetricRays ra{center_a, rays.directions};
    const MetricRays rb{center_b, rays.directions};
    const Matrix ta = envelope_ray_distances(a, ra, exec);
    const Matrix tb = envelope_ray_distances(b, rb, exec);
    const Vector offset = center_a - center_b;
    const bool shared = offset.squaredNorm() == 0.0;
    const Matrix& v = rays.directions->matrix();
    Matrix err(ta.rows(), ta.cols());
    for (Eigen::Index j = 0; j < ta.rows(); ++j) {
        for (Eigen::Index k = 0; k < ta.cols(); ++k) {
            if (std::isnan(ta(j, k)) || std::isnan(tb(j, k))) {
                err(j, k) = kNaN;
            } else if (shared) {
                err(j, k) = std::abs(ta(j, k) - tb(j, k));
            } else {
                err(j, k) = (offset + (ta(j, k) - tb(j, k)) * v.col(j)).norm();
            }
        }
    }
    return summarise(err);
}

SnapshotDistance::SnapshotDistance(DirectionSetPtr envelope_directions,
                                   DirectionSetPtr ray_directions)
    : envelope_directions_(std::move(envelope_directions)),
      ray_directions_(std::move(ray_directions)) {
    if (envelope_directions_->dim() != ray_directions_->dim()) {
        throw InputError("direction sets differ in dimension");
    }
    cos_ = envelope_directions_->matrix().transpose() * ray_directions_->matrix();
}

LevelErrors SnapshotDistance::operator()(const DepthSnapshot& a, const DepthSnapshot& b,
                                         const Vector& center) const {
    if (a.alphas() != b.alphas()) throw InputError("snapshots differ in alphas");
    if (*a.directions() != *envelope_directions_ || *b.directions() != *envelope_directions_) {
        throw InputError("snapshot direction set differs from the precomputed one");
    }
    const Vector center_proj = envelope_directions_->matrix().transpose() * center;
    const Matrix ta = ray_distances(a.quantiles(), cos_, center_proj, Exec::serial);
    const Matrix tb = ray_distances(b.quantiles(), cos_, center_proj, Exec::serial);
    Matrix err(ta.rows(), ta.cols());
    for (Eigen::Index j = 0; j < ta.rows(); ++j) {
        for (Eigen::Index k = 0; k < ta.cols(); ++k) {
            err(j, k) = (std::isnan(ta(j, k)) || std::isnan(tb(j, k))) ? kNaN
                                                                       : std::abs(ta(j, k) - tb(j, k));
        }
    }
    return summarise(err);
}

}  // namespace tdepth

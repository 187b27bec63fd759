#include "tdepth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tdepth/error.hpp"

namespace tdepth {

namespace {

void check_dim(int expected, Eigen::Index got) {
    if (got != expected) {
        throw InputError("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                         std::to_string(got));
    }
}

// Indices accepted greedily when every accepted pair must satisfy dot <= max_dot.
std::vector<std::size_t> greedy_accept(const Matrix& v, double max_dot, std::size_t stop_after) {
    std::vector<std::size_t> kept;
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        bool ok = true;
        for (std::size_t a : kept) {
            if (v.col(static_cast<Eigen::Index>(a)).dot(v.col(c)) > max_dot) {
                ok = false;
                break;
            }
        }
        if (ok) {
            kept.push_back(static_cast<std::size_t>(c));
            if (kept.size() >= stop_after) break;
        }
    }
    return kept;
}

}  // namespace

DirectionSet::DirectionSet(Matrix vectors) : vectors_(std::move(vectors)) {
    for (Eigen::Index c = 0; c < vectors_.cols(); ++c) {
        if (std::abs(vectors_.col(c).norm() - 1.0) > 1e-12) {
            throw InputError("direction " + std::to_string(c) + " is not unit length");
        }
    }
}

DirectionSet sample_uniform_directions(int dim, std::size_t count, std::uint64_t seed) {
    if (dim < 2) throw ParameterError("direction dimension must be >= 2");
    if (count < 1) throw ParameterError("direction count must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(dim, static_cast<Eigen::Index>(count));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double norm = 0.0;
        do {
            for (int r = 0; r < dim; ++r) m(r, c) = normal(rng);
            norm = m.col(c).norm();
        } while (norm == 0.0);
        m.col(c) /= norm;
    }
    return DirectionSet(std::move(m));
}

DirectionSet equidistant_filter(const DirectionSet& candidates, std::size_t target_count) {
    if (target_count < 1) throw ParameterError("target count must be >= 1");
    if (target_count > candidates.size()) {
        throw ParameterError("target count " + std::to_string(target_count) +
                             " exceeds candidate count " + std::to_string(candidates.size()));
    }
    if (target_count == candidates.size()) return candidates;

    const Matrix& v = candidates.matrix();
    // Feasible: lo keeps >= target vectors. hi = pi keeps one (or an antipodal pair).
    double lo = 0.0;
    double hi = std::numbers::pi;
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (greedy_accept(v, std::cos(mid), target_count).size() >= target_count) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    std::vector<std::size_t> kept;
    if (lo > 0.0) {
        kept = greedy_accept(v, std::cos(lo), target_count);
    } else {
        kept.resize(target_count);
        for (std::size_t i = 0; i < target_count; ++i) kept[i] = i;
    }
    Matrix out(v.rows(), static_cast<Eigen::Index>(target_count));
    for (std::size_t i = 0; i < target_count; ++i) {
        out.col(static_cast<Eigen::Index>(i)) = v.col(static_cast<Eigen::Index>(kept[i]));
    }
    return DirectionSet(std::move(out));
}

double min_pairwise_angle(const DirectionSet& set) {
    double max_dot = -1.0;
    const Matrix& v = set.matrix();
    for (Eigen::Index a = 0; a < v.cols(); ++a) {
        for (Eigen::Index b = a + 1; b < v.cols(); ++b) max_dot = std::max(max_dot, v.col(a).dot(v.col(b)));
    }
    return std::acos(std::clamp(max_dot, -1.0, 1.0));
}

bool envelope_contains(const Envelope& env, const Vector& point, double tolerance) {
    check_dim(env.dim(), point.size());
    const Matrix& u = env.directions->matrix();
    for (Eigen::Index i = 0; i < u.cols(); ++i) {
        if (u.col(i).dot(point) < env.quantiles[i] - tolerance) return false;
    }
    return true;
}

std::optional<double> line_exit_distance(const Envelope& env, const Vector& center,
                                         const Vector& direction) {
    check_dim(env.dim(), center.size());
    check_dim(env.dim(), direction.size());
    const Matrix& u = env.directions->matrix();
    std::optional<double> best;
    for (Eigen::Index i = 0; i < u.cols(); ++i) {
        const double ud = u.col(i).dot(direction);
        if (ud < 0.0) {
            const double t = (env.quantiles[i] - u.col(i).dot(center)) / ud;
            if (!best || t < *best) best = t;
        }
    }
    return best;
}

std::optional<Vector> ray_envelope_intercept(const Envelope& env, const Vector& center,
                                             const Vector& direction) {
    check_dim(env.dim(), center.size());
    if (!envelope_contains(env, center)) {
        throw PreconditionError("ray origin lies outside the envelope");
    }
    const auto t = line_exit_distance(env, center, direction);
    if (!t) return std::nullopt;
    return Vector(center + *t * direction);
}

DepthSnapshot::DepthSnapshot(DirectionSetPtr directions, std::vector<double> alphas,
                             Matrix quantiles, std::uint64_t timestamp)
    : directions_(std::move(directions)),
      alphas_(std::move(alphas)),
      quantiles_(std::move(quantiles)),
      timestamp_(timestamp) {
    if (!directions_) throw InputError("snapshot needs a direction set");
    if (alphas_.empty()) throw InputError("snapshot needs at least one alpha");
    if (quantiles_.rows() != static_cast<Eigen::Index>(directions_->size()) ||
        quantiles_.cols() != static_cast<Eigen::Index>(alphas_.size())) {
        throw InputError("quantile matrix must be n_u x K");
    }
    for (std::size_t k = 1; k < alphas_.size(); ++k) {
        if (!(alphas_[k] > alphas_[k - 1])) throw InputError("snapshot alphas must increase");
    }
    if (!quantiles_.allFinite()) throw InputError("snapshot quantiles must be finite");
    for (Eigen::Index i = 0; i < quantiles_.rows(); ++i) {
        for (Eigen::Index k = 1; k < quantiles_.cols(); ++k) {
            if (quantiles_(i, k) < quantiles_(i, k - 1)) {
                throw InputError("snapshot quantiles must be non-decreasing in alpha");
            }
        }
    }
    envelopes_.reserve(alphas_.size());
    for (std::size_t k = 0; k < alphas_.size(); ++k) {
        envelopes_.push_back({directions_, quantiles_.col(static_cast<Eigen::Index>(k)), alphas_[k]});
    }
}

bool DepthSnapshot::operator==(const DepthSnapshot& other) const {
    return alphas_ == other.alphas_ && timestamp_ == other.timestamp_ &&
           quantiles_ == other.quantiles_ &&
           (directions_ == other.directions_ || *directions_ == *other.directions_);
}

double point_depth_query(const DepthSnapshot& snapshot, const Vector& point) {
    check_dim(snapshot.dim(), point.size());
    const Matrix& u = snapshot.directions()->matrix();
    const Matrix& q = snapshot.quantiles();
    // Projections are computed on first use; early exits skip most of them.
    Vector proj(u.cols());
    Eigen::Index known = 0;
    for (std::size_t kk = snapshot.levels(); kk-- > 0;) {
        const auto k = static_cast<Eigen::Index>(kk);
        bool inside = true;
        for (Eigen::Index i = 0; i < u.cols(); ++i) {
            if (i == known) proj[known++] = u.col(i).dot(point);
            if (proj[i] < q(i, k)) {
                inside = false;
                break;
            }
        }
        // Nested regions: inside level k means inside every shallower level too.
        if (inside) return snapshot.alphas()[kk];
    }
    return 0.0;
}

double point_depth_scan(const DepthSnapshot& snapshot, const Vector& point) {
    check_dim(snapshot.dim(), point.size());
    const Matrix& u = snapshot.directions()->matrix();
    double depth = 0.0;
    for (std::size_t k = 0; k < snapshot.levels(); ++k) {
        bool inside = true;
        for (Eigen::Index i = 0; i < u.cols(); ++i) {
            inside = inside && (u.col(i).dot(point) >= snapshot.quantiles()(i, static_cast<Eigen::Index>(k)));
        }
        if (inside) depth = std::max(depth, snapshot.alphas()[k]);
    }
    return depth;
}

std::vector<double> point_depth_batch(const DepthSnapshot& snapshot, const Matrix& points,
                                      Exec exec) {
    check_dim(snapshot.dim(), points.rows());
    const auto m = static_cast<std::ptrdiff_t>(points.cols());
    std::vector<double> out(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static) if (run_parallel(exec, out.size()))
    for (std::ptrdiff_t j = 0; j < m; ++j) {
        out[static_cast<std::size_t>(j)] = point_depth_query(snapshot, points.col(j));
    }
    return out;
}

std::vector<Eigen::Vector2d> contour_polyline_2d(const Envelope& env, int resolution,
                                                 const Vector& center) {
    if (env.dim() != 2) throw InputError("contour polylines are planar only");
    if (resolution < 1) throw ParameterError("resolution must be >= 1");
    std::vector<Eigen::Vector2d> out;
    out.reserve(static_cast<std::size_t>(resolution));
    for (int j = 0; j < resolution; ++j) {
        const double angle = 2.0 * std::numbers::pi * j / resolution;
        const Vector dir = Eigen::Vector2d(std::cos(angle), std::sin(angle));
        const auto hit = ray_envelope_intercept(env, center, dir);
        if (!hit) throw StateError("envelope is unbounded; no closed contour");
        out.emplace_back((*hit)[0], (*hit)[1]);
    }
    return out;
}

}  // namespace tdepth

#include "tdepth/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "tdepth/error.hpp"

namespace tdepth {

namespace {

void check_dim(int expected, Eigen::Index got) {
    if (got != expected) throw InputError("dimension mismatch");
}

// u'X for every cached sample; shared by the batch kernel and the sorted index
// so both count against bit-identical projections.
Eigen::RowVectorXd project(const Eigen::Ref<const Vector>& u, const Matrix& samples) {
    return u.transpose() * samples;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal quantile needs p in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

GaussianModel::GaussianModel(Vector mu, Matrix sigma) : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    const auto p = mu_.size();
    if (p < 1 || sigma_.rows() != p || sigma_.cols() != p) {
        throw ModelError("covariance must be p x p for a p-dimensional mean");
    }
    if (!mu_.allFinite() || !sigma_.allFinite()) throw ModelError("model parameters must be finite");
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw ModelError("covariance is not symmetric");
    }
    Eigen::LLT<Matrix> llt(sigma_);
    if (llt.info() != Eigen::Success) throw ModelError("covariance is not positive definite");
    chol_ = llt.matrixL();
    sigma_inv_ = llt.solve(Matrix::Identity(p, p));
    if (!sigma_inv_.allFinite()) throw ModelError("covariance is singular");
}

double GaussianModel::mahalanobis(const Vector& w) const {
    check_dim(dim(), w.size());
    const Vector z = chol_.triangularView<Eigen::Lower>().solve(w - mu_);
    return z.norm();
}

double mvn_depth(const GaussianModel& model, const Vector& w) {
    return normal_cdf(-model.mahalanobis(w));
}

double mvn_depth_tangent(const GaussianModel& model, const Vector& w, TangentScale scale) {
    check_dim(model.dim(), w.size());
    const Vector g = model.precision() * (w - model.mean());
    const double gn = g.norm();
    if (gn == 0.0) return 0.5;
    const Vector t = -g / gn;
    const double sd = scale == TangentScale::covariance
                          ? std::sqrt(t.dot(model.covariance() * t))
                          : std::sqrt(t.dot(model.precision() * t));
    return normal_cdf((t.dot(w) - t.dot(model.mean())) / sd);
}

Vector mvn_contour_intercept(const GaussianModel& model, double alpha, const Vector& center,
                             const Vector& direction) {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw ParameterError("contour intercepts need 0 < alpha < 0.5");
    }
    check_dim(model.dim(), center.size());
    check_dim(model.dim(), direction.size());
    const double scale = 1.0 + model.mean().norm();
    if ((center - model.mean()).norm() > 1e-9 * scale) {
        throw PreconditionError("contour rays must start at the distribution mean");
    }
    const double r = -normal_quantile(alpha);
    const double t = r / std::sqrt(direction.dot(model.precision() * direction));
    return model.mean() + t * direction;
}

MonteCarloModel::MonteCarloModel(const Sampler& sampler, int dim, std::size_t n_samples,
                                 std::uint64_t seed)
    : samples_(dim, static_cast<Eigen::Index>(n_samples)) {
    Rng rng(seed);
    for (Eigen::Index j = 0; j < samples_.cols(); ++j) {
        Vector x = sampler(rng);
        check_dim(dim, x.size());
        samples_.col(j) = x;
    }
}

MonteCarloModel::MonteCarloModel(Matrix samples) : samples_(std::move(samples)) {}

std::vector<double> mc_depth_batch(const MonteCarloModel& model, const Matrix& points,
                                   const DirectionSet& directions, Exec exec) {
    if (model.size() == 0) throw StateError("Monte Carlo cache is empty");
    check_dim(model.dim(), points.rows());
    check_dim(model.dim(), directions.dim());
    const auto m = static_cast<std::size_t>(points.cols());
    const auto n_dirs = static_cast<std::ptrdiff_t>(directions.size());
    const double inv_n = 1.0 / static_cast<double>(model.size());
    std::vector<double> best(m, 1.0);

#pragma omp parallel if (run_parallel(exec, directions.size()))
    {
        std::vector<double> local(m, 1.0);
#pragma omp for schedule(dynamic, 4)
        for (std::ptrdiff_t d = 0; d < n_dirs; ++d) {
            const auto u = directions[static_cast<std::size_t>(d)];
            const Eigen::RowVectorXd proj = project(u, model.samples());
            for (std::size_t j = 0; j < m; ++j) {
                const double cut = u.dot(points.col(static_cast<Eigen::Index>(j)));
                const auto below = (proj.array() <= cut).count();
                local[j] = std::min(local[j], static_cast<double>(below) * inv_n);
            }
        }
#pragma omp critical
        for (std::size_t j = 0; j < m; ++j) best[j] = std::min(best[j], local[j]);
    }
    return best;
}

double mc_depth(const MonteCarloModel& model, const Vector& w, std::size_t n_dirs,
                std::uint64_t dir_seed, Exec exec) {
    if (model.size() == 0) throw StateError("Monte Carlo cache is empty");
    if (n_dirs < 100) throw ParameterError("mc_depth needs at least 100 directions");
    check_dim(model.dim(), w.size());
    const DirectionSet dirs = sample_uniform_directions(model.dim(), n_dirs, dir_seed);
    return mc_depth_batch(model, Matrix(w), dirs, exec).front();
}

ProjectionDepthIndex::ProjectionDepthIndex(const MonteCarloModel& model,
                                           const DirectionSet& directions, Exec exec)
    : directions_(directions.matrix()), sorted_(directions.size()), n_(model.size()) {
    if (n_ == 0) throw StateError("Monte Carlo cache is empty");
    check_dim(model.dim(), directions.dim());
    const auto n_dirs = static_cast<std::ptrdiff_t>(directions.size());
#pragma omp parallel for schedule(dynamic, 4) if (run_parallel(exec, directions.size()))
    for (std::ptrdiff_t d = 0; d < n_dirs; ++d) {
        const Eigen::RowVectorXd proj = project(directions_.col(d), model.samples());
        auto& out = sorted_[static_cast<std::size_t>(d)];
        out.assign(proj.data(), proj.data() + proj.size());
        std::sort(out.begin(), out.end());
    }
}

double ProjectionDepthIndex::depth(const Vector& w) const {
    check_dim(static_cast<int>(directions_.rows()), w.size());
    std::size_t best = n_;
    for (std::size_t d = 0; d < sorted_.size(); ++d) {
        const double cut = directions_.col(static_cast<Eigen::Index>(d)).dot(w);
        const auto& s = sorted_[d];
        best = std::min(best, static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), cut) - s.begin()));
    }
    return static_cast<double>(best) * (1.0 / static_cast<double>(n_));
}

DepthFunction gaussian_depth_function(const GaussianModel& model) {
    return [model](const Vector& w) { return mvn_depth(model, w); };
}

DepthFunction monte_carlo_depth_function(const MonteCarloModel& model, std::size_t n_dirs,
                                         std::uint64_t dir_seed) {
    if (n_dirs < 100) throw ParameterError("Monte Carlo oracle needs at least 100 directions");
    auto index = std::make_shared<const ProjectionDepthIndex>(
        model, sample_uniform_directions(model.dim(), n_dirs, dir_seed));
    return [index](const Vector& w) { return index->depth(w); };
}

}  // namespace tdepth

#pragma once

// Ground truth for depth: closed form for multivariate normal distributions,
// Monte Carlo minimisation over directions for anything that can be sampled.

#include <cstdint>
#include <functional>

#include "tdepth/geometry.hpp"
#include "tdepth/parallel.hpp"

namespace tdepth {

double normal_cdf(double x);
double normal_quantile(double p);

class GaussianModel {
public:
    /// Throws ModelError if sigma is not symmetric (1e-10) or not positive definite.
    GaussianModel(Vector mu, Matrix sigma);

    int dim() const { return static_cast<int>(mu_.size()); }
    const Vector& mean() const { return mu_; }
    const Matrix& covariance() const { return sigma_; }
    const Matrix& precision() const { return sigma_inv_; }
    /// Lower Cholesky factor L with L L' = sigma.
    const Matrix& cholesky() const { return chol_; }

    double mahalanobis(const Vector& w) const;

private:
    Vector mu_;
    Matrix sigma_;
    Matrix sigma_inv_;
    Matrix chol_;
};

/// Tukey depth under N(mu, sigma): Phi(-Mahalanobis distance), 0.5 at the mean.
double mvn_depth(const GaussianModel& model, const Vector& w);

/// Standard deviation used in the tangent-halfspace route below.
enum class TangentScale {
    covariance,  ///< sqrt(t' Sigma t): variance of the projection t'X
    precision,   ///< sqrt(t' Sigma^-1 t): the alternative printed form
};

/// Depth through the supporting halfspace whose inward normal is
/// t = -Sigma^-1 (w - mu) / |Sigma^-1 (w - mu)|, evaluated as
/// Phi(t'w; t'mu, scale). Only TangentScale::covariance is a valid depth;
/// both are exposed so the choice stays testable.
double mvn_depth_tangent(const GaussianModel& model, const Vector& w, TangentScale scale);

/// Point where the ray mu + t*direction crosses the alpha-depth contour.
/// Throws ParameterError unless 0 < alpha < 0.5, PreconditionError unless
/// `center` equals the model mean.
Vector mvn_contour_intercept(const GaussianModel& model, double alpha, const Vector& center,
                             const Vector& direction);

/// Empirical depth from a cached sample: min over directions of the fraction
/// of samples with u'X <= u'w.
class MonteCarloModel {
public:
    using Sampler = std::function<Vector(Rng&)>;

    /// Draws `n_samples` observations from `sampler` with a generator seeded by `seed`.
    MonteCarloModel(const Sampler& sampler, int dim, std::size_t n_samples, std::uint64_t seed);

    /// Wraps an existing sample (dim x n).
    explicit MonteCarloModel(Matrix samples);

    int dim() const { return static_cast<int>(samples_.rows()); }
    std::size_t size() const { return static_cast<std::size_t>(samples_.cols()); }
    const Matrix& samples() const { return samples_; }

private:
    Matrix samples_;
};

/// Monte Carlo depth over `n_dirs` uniform directions drawn from `dir_seed`.
/// Biased upwards (min over a finite set). Throws StateError on an empty cache
/// and ParameterError when n_dirs < 100.
double mc_depth(const MonteCarloModel& model, const Vector& w, std::size_t n_dirs,
                std::uint64_t dir_seed = 7, Exec exec = Exec::parallel);

/// Same estimate for every column of `points`, sharing one projection pass per direction.
std::vector<double> mc_depth_batch(const MonteCarloModel& model, const Matrix& points,
                                   const DirectionSet& directions, Exec exec = Exec::parallel);

/// Sorted projections of a Monte Carlo sample onto a fixed direction set, so
/// each depth query costs O(n_dirs log n) instead of O(n_dirs n).
class ProjectionDepthIndex {
public:
    ProjectionDepthIndex(const MonteCarloModel& model, const DirectionSet& directions,
                         Exec exec = Exec::parallel);

    /// min over directions of #{u'X <= u'w} / n; identical to mc_depth_batch on the same inputs.
    double depth(const Vector& w) const;

private:
    Matrix directions_;
    std::vector<std::vector<double>> sorted_;
    std::size_t n_ = 0;
};

/// Depth oracle callable used by the metrics.
using DepthFunction = std::function<double(const Vector&)>;

DepthFunction gaussian_depth_function(const GaussianModel& model);
DepthFunction monte_carlo_depth_function(const MonteCarloModel& model, std::size_t n_dirs,
                                         std::uint64_t dir_seed = 7);

}  // namespace tdepth

#pragma once

#include <cstdint>
#include <optional>

#include "tdepth/geometry.hpp"
#include "tdepth/oracle.hpp"
#include "tdepth/parallel.hpp"

namespace tdepth {

/// Cov(X_i, X_j) = exp(-rate |i - j|).
Matrix ar_covariance(int p, double rate);

/// [[1, rho], [rho, 1]]
Matrix bivariate_covariance(double rho);

enum class StreamKind { static_gaussian, static_lognormal, dynamic_gaussian };

struct StreamSpec {
    StreamKind kind = StreamKind::static_gaussian;
    int dim = 2;
    std::uint64_t length = 1000;
    /// Period T of the dynamic stream.
    double period = 1000.0;
    std::uint64_t seed = 1;
    /// Static kinds only; the lognormal stream is exp() of this Gaussian.
    Vector mu;
    Matrix sigma;

    void validate() const;
};

struct IndexedObservation {
    std::uint64_t n;
    Vector x;
};

/// i.i.d. Gaussian or componentwise-exponentiated Gaussian draws.
class StaticStream {
public:
    explicit StaticStream(const StreamSpec& spec);

    /// Next observation, or std::nullopt after `length` draws.
    std::optional<IndexedObservation> next();

    const GaussianModel& gaussian() const { return model_; }
    bool lognormal() const { return lognormal_; }

private:
    GaussianModel model_;
    bool lognormal_;
    std::uint64_t length_;
    std::uint64_t n_ = 0;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Gaussian stream whose mean and correlation rotate with period T:
///   E X_{n,i} = sin(2 pi n / T + psi_i)
///   Cov(X_{n,i}, X_{n,j}) = (0.4 sin(2 pi n / T + psi) + 0.4)^|i-j|
/// with the phases drawn once per stream, uniform on [0, 2 pi].
class DynamicStream {
public:
    explicit DynamicStream(const StreamSpec& spec);

    std::optional<IndexedObservation> next();

    Vector mean_at(std::uint64_t n) const;
    Matrix covariance_at(std::uint64_t n) const;
    GaussianModel model_at(std::uint64_t n) const { return GaussianModel(mean_at(n), covariance_at(n)); }

    const Vector& mean_phases() const { return mean_phase_; }
    double covariance_phase() const { return cov_phase_; }

private:
    int dim_;
    double period_;
    std::uint64_t length_;
    std::uint64_t n_ = 0;
    Vector mean_phase_;
    double cov_phase_ = 0.0;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Materialises any stream kind into a dim x length matrix.
Matrix generate(const StreamSpec& spec);

}  // namespace tdepth

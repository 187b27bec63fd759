#include "tdepth/synthdata.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tdepth/error.hpp"

namespace tdepth {

Matrix ar_covariance(int p, double rate) {
    if (p < 1) throw ParameterError("dimension must be >= 1");
    if (!(rate > 0.0)) throw ParameterError("rate must be positive");
    Matrix s(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) s(i, j) = std::exp(-rate * std::abs(i - j));
    }
    return s;
}

Matrix bivariate_covariance(double rho) {
    Matrix s(2, 2);
    s << 1.0, rho, rho, 1.0;
    return s;
}

void StreamSpec::validate() const {
    if (dim < 1) throw ParameterError("stream dimension must be >= 1");
    if (kind == StreamKind::dynamic_gaussian) {
        if (!(period > 0.0)) throw ParameterError("period must be positive");
        return;
    }
    if (mu.size() != dim || sigma.rows() != dim || sigma.cols() != dim) {
        throw ParameterError("static stream needs a dim-sized mean and covariance");
    }
}

namespace {

GaussianModel static_model(const StreamSpec& spec) {
    spec.validate();
    try {
        return GaussianModel(spec.mu, spec.sigma);
    } catch (const ModelError& e) {
        throw ParameterError(std::string("invalid stream covariance: ") + e.what());
    }
}

}  // namespace

StaticStream::StaticStream(const StreamSpec& spec)
    : model_(static_model(spec)),
      lognormal_(spec.kind == StreamKind::static_lognormal),
      length_(spec.length),
      rng_(derive_seed(spec.seed, 101)) {
    if (spec.kind == StreamKind::dynamic_gaussian) throw ParameterError("not a static stream spec");
}

std::optional<IndexedObservation> StaticStream::next() {
    if (n_ >= length_) return std::nullopt;
    Vector z(model_.dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal_(rng_);
    Vector x = model_.mean() + model_.cholesky() * z;
    if (lognormal_) x = x.array().exp().matrix();
    return IndexedObservation{++n_, std::move(x)};
}

DynamicStream::DynamicStream(const StreamSpec& spec)
    : dim_(spec.dim), period_(spec.period), length_(spec.length), rng_(derive_seed(spec.seed, 202)) {
    if (spec.kind != StreamKind::dynamic_gaussian) throw ParameterError("not a dynamic stream spec");
    spec.validate();
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    mean_phase_.resize(dim_);
    for (int i = 0; i < dim_; ++i) mean_phase_[i] = phase(rng_);
    cov_phase_ = phase(rng_);
    // Base correlation stays in [0, 0.8], so every covariance is positive definite.
    const auto grid = static_cast<std::uint64_t>(std::ceil(period_));
    for (std::uint64_t n = 0; n < grid; n += std::max<std::uint64_t>(1, grid / 64)) {
        (void)model_at(n);
    }
}

Vector DynamicStream::mean_at(std::uint64_t n) const {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(n) / period_;
    Vector mu(dim_);
    for (int i = 0; i < dim_; ++i) mu[i] = std::sin(angle + mean_phase_[i]);
    return mu;
}

Matrix DynamicStream::covariance_at(std::uint64_t n) const {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(n) / period_;
    const double base = 0.4 * std::sin(angle + cov_phase_) + 0.4;
    Matrix s(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) s(i, j) = std::pow(base, std::abs(i - j));
    }
    return s;
}

std::optional<IndexedObservation> DynamicStream::next() {
    if (n_ >= length_) return std::nullopt;
    ++n_;
    Eigen::LLT<Matrix> llt(covariance_at(n_));
    if (llt.info() != Eigen::Success) {
        throw Error("covariance not positive definite at n = " + std::to_string(n_));
    }
    Vector z(dim_);
    for (int i = 0; i < dim_; ++i) z[i] = normal_(rng_);
    return IndexedObservation{n_, mean_at(n_) + Matrix(llt.matrixL()) * z};
}

Matrix generate(const StreamSpec& spec) {
    Matrix out(spec.dim, static_cast<Eigen::Index>(spec.length));
    auto drain = [&out](auto& stream) {
        while (auto obs = stream.next()) out.col(static_cast<Eigen::Index>(obs->n - 1)) = obs->x;
    };
    if (spec.kind == StreamKind::dynamic_gaussian) {
        DynamicStream s(spec);
        drain(s);
    } else {
        StaticStream s(spec);
        drain(s);
    }
    return out;
}

}  // namespace tdepth

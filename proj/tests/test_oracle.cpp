#include <doctest.h>

#include <cmath>
#include <random>

#include "tdepth/error.hpp"
#include "tdepth/oracle.hpp"
#include "tdepth/reference.hpp"
#include "tdepth/synthdata.hpp"

using namespace tdepth;

namespace {

Matrix random_spd(int p, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = z(rng);
    return a * a.transpose() + 0.5 * Matrix::Identity(p, p);
}

}  // namespace

TEST_CASE("normal cdf and quantile") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(0.0), ParameterError);
    CHECK_THROWS_AS(normal_quantile(1.0), ParameterError);
}

TEST_CASE("model validation") {
    Matrix asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS(GaussianModel(Vector::Zero(2), asym), ModelError);
    Matrix singular(2, 2);
    singular << 1, 1, 1, 1;
    CHECK_THROWS_AS(GaussianModel(Vector::Zero(2), singular), ModelError);
    CHECK_THROWS_AS(GaussianModel(Vector::Zero(3), Matrix::Identity(2, 2)), ModelError);
    const GaussianModel m(Vector::Zero(2), Matrix::Identity(2, 2));
    CHECK_THROWS_AS(mvn_depth(m, Vector::Zero(3)), InputError);
}

TEST_CASE("analytic depth examples") {
    const GaussianModel std2(Vector::Zero(2), Matrix::Identity(2, 2));
    CHECK(mvn_depth(std2, Vector::Zero(2)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mvn_depth(std2, Eigen::Vector2d(normal_quantile(0.9), 0)) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(std::abs(mvn_depth(std2, Eigen::Vector2d(1.2816, 0)) - 0.1) < 1e-5);

    const GaussianModel corr(Vector::Zero(2), bivariate_covariance(0.82));
    const Eigen::Vector2d w(1.0, -1.0);
    const double maha = std::sqrt(4.0 / (1.0 - 0.82 * 0.82) * (1.0 + 0.82) / 2.0);
    CHECK(mvn_depth(corr, w) == doctest::Approx(normal_cdf(-maha)).epsilon(1e-12));
}

TEST_CASE("depth is affine invariant") {
    Rng rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix sigma = random_spd(3, rng);
        const Vector mu = Vector::NullaryExpr(3, [&] { return z(rng); });
        const Matrix a = random_spd(3, rng);
        const Vector b = Vector::NullaryExpr(3, [&] { return z(rng); });
        const Vector w = Vector::NullaryExpr(3, [&] { return z(rng); });
        const GaussianModel m(mu, sigma);
        const GaussianModel t(a * mu + b, a * sigma * a.transpose());
        CHECK(mvn_depth(t, a * w + b) == doctest::Approx(mvn_depth(m, w)).epsilon(1e-9));
    }
}

TEST_CASE("covariance tangent form equals the closed form") {
    Rng rng(5);
    std::normal_distribution<double> z(0.0, 1.0);
    int precision_disagrees = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const Matrix sigma = random_spd(3, rng);
        const GaussianModel m(Vector::Zero(3), sigma);
        const Vector w = Vector::NullaryExpr(3, [&] { return z(rng); });
        CHECK(mvn_depth_tangent(m, w, TangentScale::covariance) == doctest::Approx(mvn_depth(m, w)).epsilon(1e-10));
        if (std::abs(mvn_depth_tangent(m, w, TangentScale::precision) - mvn_depth(m, w)) > 1e-6) ++precision_disagrees;
    }
    CHECK(precision_disagrees > 40);

    const GaussianModel iso(Vector::Zero(2), Matrix::Identity(2, 2));
    const Eigen::Vector2d w(0.3, -1.1);
    CHECK(mvn_depth_tangent(iso, w, TangentScale::precision) == doctest::Approx(mvn_depth(iso, w)).epsilon(1e-12));
}

TEST_CASE("contour intercepts lie on the contour") {
    Rng rng(6);
    const GaussianModel m(Eigen::Vector3d(1, -2, 0.5), random_spd(3, rng));
    const DirectionSet dirs = sample_uniform_directions(3, 50, 2);
    for (double alpha : {0.01, 0.2, 0.45}) {
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            const Vector x = mvn_contour_intercept(m, alpha, m.mean(), dirs[i]);
            CHECK(mvn_depth(m, x) == doctest::Approx(alpha).epsilon(1e-10));
            CHECK((x - m.mean()).normalized().dot(dirs[i]) == doctest::Approx(1.0));
        }
    }
    CHECK_THROWS_AS(mvn_contour_intercept(m, 0.5, m.mean(), dirs[0]), ParameterError);
    CHECK_THROWS_AS(mvn_contour_intercept(m, 0.1, Vector::Zero(3), dirs[0]), PreconditionError);
}

TEST_CASE("Monte Carlo depth agrees with the analytic depth") {
    const GaussianModel truth(Vector::Zero(2), bivariate_covariance(0.82));
    const MonteCarloModel mc(
        [&](Rng& rng) {
            std::normal_distribution<double> z(0.0, 1.0);
            const Eigen::Vector2d e(z(rng), z(rng));
            return Vector(truth.cholesky() * e);
        },
        2, 200000, 11);
    for (const Eigen::Vector2d w : {Eigen::Vector2d(0, 0), Eigen::Vector2d(0.5, 0.2), Eigen::Vector2d(-1, 1),
                                    Eigen::Vector2d(1.5, 1.0)}) {
        CHECK(std::abs(mc_depth(mc, w, 1000) - mvn_depth(truth, w)) < 0.01);
    }
}

TEST_CASE("Monte Carlo errors and equivalent kernels") {
    CHECK_THROWS_AS(mc_depth(MonteCarloModel(Matrix(2, 0)), Vector::Zero(2), 100), StateError);
    const MonteCarloModel mc(generate(StreamSpec{StreamKind::static_gaussian, 2, 5000, 1.0, 3, Vector::Zero(2),
                                                 Matrix::Identity(2, 2)}));
    CHECK_THROWS_AS(mc_depth(mc, Vector::Zero(2), 99), ParameterError);

    const DirectionSet dirs = sample_uniform_directions(2, 300, 7);
    const Matrix points = generate(StreamSpec{StreamKind::static_gaussian, 2, 40, 1.0, 9, Vector::Zero(2),
                                              Matrix::Identity(2, 2)});
    const std::vector<double> batch = mc_depth_batch(mc, points, dirs);
    const std::vector<double> serial = mc_depth_batch(mc, points, dirs, Exec::serial);
    const ProjectionDepthIndex index(mc, dirs);
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        CHECK(batch[k] == serial[k]);
        CHECK(index.depth(points.col(j)) == batch[k]);
        CHECK(std::abs(reference::mc_depth(mc.samples(), points.col(j), dirs) - batch[k]) <= 1.0 / 5000.0);
    }
    CHECK(mc_depth(mc, points.col(0), 300, 7) == batch[0]);
}

TEST_CASE("lognormal Monte Carlo depth decreases away from the centre") {
    const MonteCarloModel logn(generate(StreamSpec{StreamKind::static_lognormal, 2, 100000, 1.0, 21,
                                                   Vector::Zero(2), ar_covariance(2, 0.2)}));
    const double centre = mc_depth(logn, Vector::Ones(2), 1000);
    CHECK(centre > 0.3);
    CHECK(centre <= 0.5);
    CHECK(mc_depth(logn, Eigen::Vector2d(3, 3), 1000) < centre);
    CHECK(mc_depth(logn, Eigen::Vector2d(-0.5, 1), 1000) == 0.0);
}

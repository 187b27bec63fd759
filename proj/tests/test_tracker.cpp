#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "tdepth/depth_tracker.hpp"
#include "tdepth/error.hpp"
#include "tdepth/metrics.hpp"
#include "tdepth/reference.hpp"
#include "tdepth/synthdata.hpp"

using namespace tdepth;

namespace {

Matrix gaussian_data(const Matrix& sigma, std::uint64_t n, std::uint64_t seed) {
    StreamSpec spec;
    spec.dim = static_cast<int>(sigma.rows());
    spec.length = n;
    spec.seed = seed;
    spec.mu = Vector::Zero(spec.dim);
    spec.sigma = sigma;
    return generate(spec);
}

TrackerConfig config_2d(std::size_t n_u, std::vector<double> alphas, std::uint64_t seed) {
    TrackerConfig c;
    c.dim = 2;
    c.n_u = n_u;
    c.alphas = std::move(alphas);
    c.seed = seed;
    return c;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("config validation") {
    TrackerConfig c;
    c.n_u = 0;
    CHECK_THROWS_AS(DepthTracker{c}, ParameterError);
    c = TrackerConfig{};
    c.alphas = {0.2, 0.1};
    CHECK_THROWS_AS(DepthTracker{c}, ParameterError);
    c = TrackerConfig{};
    c.candidate_factor = 0;
    CHECK_THROWS_AS(DepthTracker{c}, ParameterError);
    c = TrackerConfig{};
    c.warmup = 0;
    CHECK_THROWS_AS(DepthTracker{c}, ParameterError);
}

TEST_CASE("initialisation is structural and deterministic") {
    const DepthTracker t = init_tracker(config_2d(50, {0.1}, 3));
    CHECK(t.directions()->size() == 50);
    CHECK(t.directions()->dim() == 2);
    for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs((*t.directions())[i].norm() - 1.0) < 1e-12);
    CHECK(*t.directions() == *init_tracker(config_2d(50, {0.1}, 3)).directions());
    CHECK_FALSE(t.ready());
}

TEST_CASE("equidistant mode filters candidate_factor * n_u candidates") {
    TrackerConfig c = config_2d(10, {0.1}, 8);
    c.direction_mode = DirectionMode::equidistant;
    const DirectionSet chosen = make_directions(c);
    const DirectionSet candidates = sample_uniform_directions(2, 100, derive_seed(8, 0));
    REQUIRE(chosen.size() == 10);
    CHECK(chosen == equidistant_filter(candidates, 10));
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < candidates.size(); ++j) found = found || chosen[i] == candidates[j];
        CHECK(found);
    }
}

TEST_CASE("warm-up buffers observations") {
    DepthTracker t(config_2d(20, {0.1, 0.3}, 1));
    const Matrix x = gaussian_data(Matrix::Identity(2, 2), 10, 4);
    for (int j = 0; j < 9; ++j) t.observe(x.col(j));
    CHECK(t.buffered() == 9);
    CHECK_FALSE(t.ready());
    CHECK_THROWS_AS(t.snapshot(), StateError);
    t.observe(x.col(9));
    CHECK(t.ready());
    CHECK(t.snapshot().levels() == 2);
}

TEST_CASE("bad observations leave the state unchanged") {
    DepthTracker t(config_2d(20, {0.1, 0.3}, 1));
    const Matrix x = gaussian_data(Matrix::Identity(2, 2), 30, 4);
    for (int j = 0; j < 30; ++j) t.observe(x.col(j));
    const Matrix before = t.estimates();
    const auto n = t.observations();
    CHECK_THROWS_AS(t.observe(Eigen::Vector3d(0, 0, 0)), InputError);
    CHECK_THROWS_AS(t.observe(Eigen::Vector2d(std::nan(""), 0)), InputError);
    CHECK(t.observations() == n);
    CHECK(t.estimates() == before);

    DepthTracker w(config_2d(20, {0.1}, 1));
    w.observe(x.col(0));
    CHECK_THROWS_AS(w.observe(Eigen::Vector2d(INFINITY, 0)), InputError);
    CHECK(w.buffered() == 1);
}

TEST_CASE("constant stream pins every estimate to the projection") {
    DepthTracker t(config_2d(30, {0.05, 0.2, 0.4}, 2));
    const Eigen::Vector2d c(1.5, -0.25);
    for (int j = 0; j < 100; ++j) t.observe(c);
    const Matrix e = t.estimates();
    for (std::size_t i = 0; i < 30; ++i) {
        const double proj = (*t.directions())[i].dot(c);
        for (Eigen::Index k = 0; k < 3; ++k) CHECK(e(static_cast<Eigen::Index>(i), k) == doctest::Approx(proj).epsilon(1e-12));
    }
}

TEST_CASE("each observation touches every direction once") {
    DepthTracker t(config_2d(37, {0.1, 0.3}, 1));
    const Matrix x = gaussian_data(Matrix::Identity(2, 2), 100, 4);
    for (int j = 0; j < 100; ++j) {
        const auto before = t.direction_updates();
        t.observe(x.col(j));
        if (j >= 10) CHECK(t.direction_updates() - before == 37);
    }
}

TEST_CASE("snapshots are nested, stable and immutable") {
    TrackerConfig c;
    c.dim = 2;
    c.n_u = 25;
    c.schedule = StepSchedule::constant(0.02);
    DepthTracker t(c);
    StreamSpec spec;
    spec.kind = StreamKind::dynamic_gaussian;
    spec.length = 100000;
    spec.seed = 5;
    DynamicStream stream(spec);
    for (int j = 0; j < 50000; ++j) t.observe(stream.next()->x);
    const DepthSnapshot a = t.snapshot();
    const DepthSnapshot b = t.snapshot();
    CHECK(a == b);
    CHECK(a.levels() == 3);
    for (Eigen::Index i = 0; i < a.quantiles().rows(); ++i) {
        CHECK(a.quantiles()(i, 0) <= a.quantiles()(i, 1));
        CHECK(a.quantiles()(i, 1) <= a.quantiles()(i, 2));
    }
    const Matrix frozen = a.quantiles();
    while (auto obs = stream.next()) t.observe(obs->x);
    CHECK(a.quantiles() == frozen);
    CHECK_FALSE(t.snapshot() == a);
    CHECK(a.timestamp() == 50000);
}

TEST_CASE("serial and parallel observe are bit-identical") {
    TrackerConfig c;
    c.dim = 3;
    c.n_u = 600;
    c.seed = 12;
    TrackerConfig serial = c;
    serial.exec = Exec::serial;
    DepthTracker p(c);
    DepthTracker s(serial);
    const Matrix x = gaussian_data(ar_covariance(3, 0.2), 3000, 7);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        p.observe(x.col(j));
        s.observe(x.col(j));
    }
    CHECK(p.estimates() == s.estimates());
    CHECK(p.snapshot() == s.snapshot());
}

TEST_CASE("tracker matches the per-direction reference implementation") {
    TrackerConfig c;
    c.dim = 3;
    c.n_u = 40;
    c.alphas = {0.05, 0.2, 0.4};
    c.seed = 13;
    DepthTracker fast(c);
    reference::Tracker slow(c, fast.directions());
    const Matrix x = gaussian_data(ar_covariance(3, 0.2), 5000, 9);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        fast.observe(x.col(j));
        slow.observe(x.col(j));
    }
    const Matrix diff = fast.snapshot().quantiles() - slow.snapshot().quantiles();
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("identical inputs give identical snapshots") {
    const Matrix x = gaussian_data(Matrix::Identity(2, 2), 500, 3);
    DepthTracker a(config_2d(20, {0.1, 0.3}, 4));
    DepthTracker b(config_2d(20, {0.1, 0.3}, 4));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        a.observe(x.col(j));
        b.observe(x.col(j));
    }
    CHECK(a.snapshot() == b.snapshot());
}

TEST_CASE("2000 observations reach MADE below 0.02 at alpha 0.1") {
    const GaussianModel truth(Vector::Zero(2), bivariate_covariance(0.82));
    const DepthFunction depth = gaussian_depth_function(truth);
    std::vector<double> made;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DepthTracker t(config_2d(50, {0.1}, seed));
        const Matrix x = gaussian_data(truth.covariance(), 2000, derive_seed(seed, 1));
        for (Eigen::Index j = 0; j < x.cols(); ++j) t.observe(x.col(j));
        const MetricRays rays = make_metric_rays(Vector::Zero(2), 1000, derive_seed(seed, 3));
        made.push_back(compute_made(t.snapshot(), depth, rays).mean);
    }
    CHECK(median_of(made) < 0.02);
}

TEST_CASE("depth estimates from a converged tracker") {
    DepthTracker t(config_2d(50, {0.05, 0.2, 0.4}, 6));
    const Matrix x = gaussian_data(Matrix::Identity(2, 2), 100000, 6);
    for (Eigen::Index j = 0; j < x.cols(); ++j) t.observe(x.col(j));
    const DepthSnapshot s = t.snapshot();
    CHECK(estimate_depth(s, Eigen::Vector2d(0, 0)) == 0.4);
    // true depth 0.01 at radius Phi^-1(0.99)
    CHECK(estimate_depth(s, Eigen::Vector2d(2.3263478740408408, 0)) == 0.0);
    const DirectionSet rays = sample_uniform_directions(2, 20, 1);
    for (std::size_t j = 0; j < rays.size(); ++j) {
        const auto w = ray_envelope_intercept(s.envelope(1), Vector::Zero(2), rays[j]);
        REQUIRE(w);
        const double d = estimate_depth(s, *w);
        CHECK((d == 0.2 || d == 0.05));
    }
}

TEST_CASE("MADE does not increase along decay checkpoints") {
    const GaussianModel truth(Vector::Zero(2), Matrix::Identity(2, 2));
    const DepthFunction depth = gaussian_depth_function(truth);
    const std::vector<std::uint64_t> checkpoints{100, 1000, 10000, 100000};
    std::vector<std::vector<double>> made(checkpoints.size());
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DepthTracker t(config_2d(20, {0.05, 0.2, 0.4}, seed));
        const Matrix x = gaussian_data(truth.covariance(), checkpoints.back(), derive_seed(seed, 1));
        const MetricRays rays = make_metric_rays(Vector::Zero(2), 1000, derive_seed(seed, 3));
        std::size_t next = 0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            t.observe(x.col(j));
            if (static_cast<std::uint64_t>(j + 1) == checkpoints[next]) {
                made[next++].push_back(compute_made(t.snapshot(), depth, rays).mean);
            }
        }
    }
    for (std::size_t c = 1; c < checkpoints.size(); ++c) CHECK(median_of(made[c]) <= median_of(made[c - 1]));
}

TEST_CASE("rotating stream and rays leaves MADE unchanged in distribution") {
    const Matrix sigma = bivariate_covariance(0.82);
    const double angle = 0.7;
    Matrix r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const GaussianModel original(Vector::Zero(2), sigma);
    const GaussianModel rotated(Vector::Zero(2), r * sigma * r.transpose());
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Matrix x = gaussian_data(sigma, 5000, derive_seed(seed, 1));
        const Matrix rx = r * x;
        DepthTracker a(config_2d(30, {0.05, 0.2, 0.4}, seed));
        DepthTracker b(config_2d(30, {0.05, 0.2, 0.4}, derive_seed(seed, 99)));
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            a.observe(x.col(j));
            b.observe(rx.col(j));
        }
        const MetricRays rays = make_metric_rays(Vector::Zero(2), 1000, derive_seed(seed, 3));
        const MetricRays rays_rot{Vector::Zero(2),
                                  std::make_shared<const DirectionSet>(DirectionSet(r * rays.directions->matrix()))};
        total += compute_made(a.snapshot(), gaussian_depth_function(original), rays).mean -
                 compute_made(b.snapshot(), gaussian_depth_function(rotated), rays_rot).mean;
    }
    CHECK(std::abs(total / 20.0) < 0.01);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "tdepth/changedetect.hpp"
#include "tdepth/error.hpp"
#include "tdepth/experiments.hpp"
#include "tdepth/synthdata.hpp"

using namespace tdepth;

namespace {

Matrix stationary(std::uint64_t n, std::uint64_t seed) {
    StreamSpec s;
    s.dim = 3;
    s.length = n;
    s.seed = seed;
    s.mu = Vector::Zero(3);
    s.sigma = Matrix::Identity(3, 3);
    return generate(s);
}

Matrix switching(std::size_t segments, std::size_t length, std::uint64_t seed) {
    Matrix x = stationary(segments * length, seed);
    for (std::size_t s = 1; s < segments; s += 2) {
        x.middleCols(static_cast<Eigen::Index>(s * length), static_cast<Eigen::Index>(length)).row(0).array() += 3.0;
    }
    return x;
}

std::vector<std::uint64_t> times(const std::vector<ChangeEvent>& events) {
    std::vector<std::uint64_t> t;
    for (const auto& e : events) t.push_back(e.t);
    return t;
}

}  // namespace

TEST_CASE("scoring examples") {
    ScoreReport r = score_detections({110, 150, 160}, {100});
    CHECK(r.precision == doctest::Approx(1.0 / 3.0));
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == doctest::Approx(0.5));
    CHECK(r.mean_detection_delay == 10.0);
    CHECK(r.correct == 1);
    CHECK(r.detections == 3);

    r = score_detections({100, 300}, {100, 300});
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.mean_detection_delay == 0.0);

    r = score_detections({}, {100});
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);

    r = score_detections({50, 120, 250, 260}, {100, 200});
    CHECK(r.correct == 2);
    CHECK(r.precision == doctest::Approx(0.5));
    CHECK(r.mean_detection_delay == doctest::Approx(35.0));

    r = score_detections({120, 900}, {100}, 500);
    CHECK(r.detections == 1);
    CHECK(r.precision == 1.0);
    CHECK_THROWS_AS(score_detections({1}, {200, 100}), InputError);
}

TEST_CASE("threshold and sd helpers") {
    CHECK(exceeds_threshold(5.0, 1.0, 0.5, 8.0));
    CHECK_FALSE(exceeds_threshold(std::nextafter(5.0, 0.0), 1.0, 0.5, 8.0));
    CHECK(ema_sd(2.0, 5.0) == 1.0);
    CHECK(ema_sd(2.0, 4.0 - 1e-12) == 0.0);
}

TEST_CASE("parameter validation") {
    DetectorParams p;
    p.delta = 1.0;
    CHECK_THROWS_AS(ChangeDetector{p}, ParameterError);
    p = DetectorParams{};
    p.h = 0;
    CHECK_THROWS_AS(ChangeDetector{p}, ParameterError);
    p = DetectorParams{};
    p.eta = 0.0;
    CHECK_THROWS_AS(ChangeDetector{p}, ParameterError);
    p = DetectorParams{};
    CHECK(p.mute() == p.h + p.warmup);
    ChangeDetector d(p);
    CHECK_THROWS_AS(d.observe(Eigen::Vector2d(0, 0)), InputError);
    CHECK_THROWS_AS(d.observe(Eigen::Vector3d(0, NAN, 0)), InputError);
    CHECK(d.clock() == 0);
}

TEST_CASE("statistics stay consistent while running") {
    DetectorParams p;
    ChangeDetector d(p);
    const Matrix x = stationary(3000, 2);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        d.observe(x.col(j));
        if (d.has_statistic()) CHECK(d.ema_ed2() >= d.ema_ed() * d.ema_ed() - 1e-9);
    }
    CHECK(d.has_statistic());
    CHECK(d.clock() == 3000);
}

TEST_CASE("few false alarms on a stationary stream") {
    int quiet = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DetectorParams p;
        p.seed = seed;
        if (run_detector(p, stationary(10000, derive_seed(seed, 50))).empty()) ++quiet;
    }
    CHECK(quiet >= 19);
}

TEST_CASE("mean switches are detected quickly") {
    int all_found = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        DetectorParams p;
        p.eta = 5.0;
        p.seed = seed;
        const auto events = times(run_detector(p, switching(5, 2000, derive_seed(seed, 60))));
        bool ok = true;
        for (std::uint64_t change : {2001u, 4001u, 6001u, 8001u}) {
            bool found = false;
            for (auto t : events) found = found || (t >= change && t < change + 500);
            ok = ok && found;
        }
        if (ok) ++all_found;
    }
    CHECK(all_found >= 9);
}

TEST_CASE("events respect the threshold and the mute window") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        DetectorParams p = regime_detector_params(seed);
        const LabeledStream s = make_regime_stream(seed, 2000, 8);
        const auto events = run_detector(p, s.data);
        std::uint64_t last = 0;
        for (const auto& e : events) {
            CHECK(e.ed_value >= e.threshold);
            CHECK(e.t - last > p.mute());
            last = e.t;
        }
    }
}

TEST_CASE("a restart forgets everything before the event") {
    DetectorParams p = regime_detector_params(3);
    const LabeledStream s = make_regime_stream(3, 2000, 8);
    ChangeDetector full(p);
    std::uint64_t first = 0;
    for (Eigen::Index j = 0; j < s.data.cols() && !first; ++j) {
        if (auto e = full.observe(s.data.col(j))) first = e->t;
    }
    REQUIRE(first > 0);
    CHECK(full.since_restart() == 0);
    CHECK_FALSE(full.tracker().ready());

    ChangeDetector fresh(p);
    for (Eigen::Index j = static_cast<Eigen::Index>(first); j < s.data.cols(); ++j) {
        const auto a = full.observe(s.data.col(j));
        const auto b = fresh.observe(s.data.col(j));
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            CHECK(a->t == b->t + first);
            CHECK(a->ed_value == b->ed_value);
        }
    }
    CHECK(full.tracker().estimates() == fresh.tracker().estimates());
    CHECK(full.ema_ed() == fresh.ema_ed());
}

TEST_CASE("raising eta never flags earlier or more often") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const LabeledStream s = make_regime_stream(seed, 2000, 8);
        std::size_t prev_count = SIZE_MAX;
        std::uint64_t prev_first = 0;
        for (double eta : {2.0, 3.0, 4.0, 6.0, 8.0, 12.0}) {
            DetectorParams p = regime_detector_params(seed);
            p.eta = eta;
            const auto events = times(run_detector(p, s.data));
            const std::uint64_t first = events.empty() ? UINT64_MAX : events.front();
            CHECK(first >= prev_first);
            CHECK(events.size() <= prev_count);
            prev_first = first;
            prev_count = events.size();
        }
    }
}

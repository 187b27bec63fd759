#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tdepth/error.hpp"
#include "tdepth/experiments.hpp"
#include "tdepth/synthdata.hpp"

using namespace tdepth;

namespace {

StreamSpec static_spec(Matrix sigma, std::uint64_t n, std::uint64_t seed) {
    StreamSpec s;
    s.dim = static_cast<int>(sigma.rows());
    s.length = n;
    s.seed = seed;
    s.mu = Vector::LinSpaced(s.dim, -1.0, 1.0);
    s.sigma = std::move(sigma);
    return s;
}

Matrix sample_covariance(const Matrix& x) {
    const Vector m = x.rowwise().mean();
    const Matrix c = x.colwise() - m;
    return c * c.transpose() / static_cast<double>(x.cols() - 1);
}

}  // namespace

TEST_CASE("covariance builders") {
    const Matrix s = ar_covariance(4, 0.2);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 3) == doctest::Approx(std::exp(-0.6)));
    CHECK(s(2, 1) == s(1, 2));
    CHECK_THROWS_AS(ar_covariance(0, 0.2), ParameterError);
    CHECK_THROWS_AS(ar_covariance(3, 0.0), ParameterError);
    CHECK(bivariate_covariance(0.82)(1, 0) == 0.82);
}

TEST_CASE("static Gaussian stream moments") {
    const StreamSpec spec = static_spec(ar_covariance(3, 0.2), 200000, 5);
    const Matrix x = generate(spec);
    CHECK(x.cols() == 200000);
    CHECK((x.rowwise().mean() - spec.mu).cwiseAbs().maxCoeff() < 0.01);
    CHECK((sample_covariance(x) - spec.sigma).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("streams are deterministic and finite in length") {
    const StreamSpec spec = static_spec(Matrix::Identity(2, 2), 5, 9);
    CHECK(generate(spec) == generate(spec));
    StreamSpec other = spec;
    other.seed = 10;
    CHECK_FALSE(generate(spec) == generate(other));
    StaticStream s(spec);
    for (std::uint64_t n = 1; n <= 5; ++n) CHECK(s.next()->n == n);
    CHECK_FALSE(s.next().has_value());
}

TEST_CASE("lognormal stream is the exponential of the Gaussian stream") {
    StreamSpec g = static_spec(ar_covariance(2, 0.2), 1000, 4);
    StreamSpec l = g;
    l.kind = StreamKind::static_lognormal;
    const Matrix xg = generate(g);
    const Matrix xl = generate(l);
    CHECK((xl.array() > 0.0).all());
    CHECK((xl.array().log() - xg.array()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("stream parameter validation") {
    StreamSpec s = static_spec(Matrix::Identity(2, 2), 10, 1);
    s.mu = Vector::Zero(3);
    CHECK_THROWS_AS(StaticStream{s}, ParameterError);
    s = static_spec(bivariate_covariance(1.5), 10, 1);
    CHECK_THROWS_AS(StaticStream{s}, ParameterError);
    StreamSpec d;
    d.kind = StreamKind::dynamic_gaussian;
    d.period = 0.0;
    CHECK_THROWS_AS(DynamicStream{d}, ParameterError);
    CHECK_THROWS_AS(StaticStream{d}, ParameterError);
    CHECK_THROWS_AS(DynamicStream{static_spec(Matrix::Identity(2, 2), 10, 1)}, ParameterError);
}

TEST_CASE("dynamic stream follows its moving model") {
    StreamSpec spec;
    spec.kind = StreamKind::dynamic_gaussian;
    spec.dim = 3;
    spec.period = 1000.0;
    spec.length = 100000;
    spec.seed = 3;
    DynamicStream stream(spec);
    const double angle = 2.0 * std::numbers::pi * 250.0 / 1000.0;
    CHECK(stream.mean_at(250)[1] == doctest::Approx(std::sin(angle + stream.mean_phases()[1])));
    const double base = 0.4 * std::sin(angle + stream.covariance_phase()) + 0.4;
    CHECK(stream.covariance_at(250)(0, 2) == doctest::Approx(base * base));
    CHECK((stream.mean_at(17) - stream.mean_at(1017)).norm() < 1e-12);
    for (double ph : {stream.mean_phases()[0], stream.covariance_phase()}) {
        CHECK(ph >= 0.0);
        CHECK(ph <= 2.0 * std::numbers::pi);
    }

    Matrix z(3, static_cast<Eigen::Index>(spec.length));
    while (auto obs = stream.next()) {
        const GaussianModel m = stream.model_at(obs->n);
        z.col(static_cast<Eigen::Index>(obs->n - 1)) =
            m.cholesky().triangularView<Eigen::Lower>().solve(obs->x - m.mean());
    }
    CHECK(z.rowwise().mean().cwiseAbs().maxCoeff() < 0.02);
    CHECK((sample_covariance(z) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("regime stream layout") {
    const LabeledStream s = make_regime_stream(4, 500, 8);
    CHECK(s.data.rows() == 3);
    CHECK(s.data.cols() == 4000);
    CHECK(s.labels.size() == 4000);
    const std::vector<std::uint64_t> expected{501, 1001, 1501, 2001, 2501, 3001, 3501};
    CHECK(s.changes == expected);
    CHECK(label_changes({0, 0, 1, 1, 1, 0}) == std::vector<std::uint64_t>{3, 6});
    CHECK(make_regime_stream(4, 500, 8).data == s.data);
    CHECK(s.data.middleCols(500, 500).row(0).mean() == doctest::Approx(1.2).epsilon(0.1));
}

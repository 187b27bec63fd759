#include "tdepth/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <random>

#include "tdepth/error.hpp"

namespace tdepth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TrackerConfig decay_config(int dim, std::size_t n_u, const std::vector<double>& alphas,
                           std::uint64_t seed) {
    TrackerConfig c;
    c.dim = dim;
    c.n_u = n_u;
    c.alphas = alphas;
    c.schedule = StepSchedule::decay();
    c.seed = seed;
    return c;
}

Matrix covariance_for(int dim, double ar_rate) {
    return ar_rate > 0.0 ? ar_covariance(dim, ar_rate) : Matrix::Identity(dim, dim);
}

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) throw InputError("median of an empty list");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (values.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

DepthSnapshot offline_snapshot(const Matrix& data, const DirectionSetPtr& directions,
                               const std::vector<double>& alphas, Exec exec) {
    if (data.cols() == 0) throw InputError("offline estimation needs at least one observation");
    if (data.rows() != directions->dim()) throw InputError("data and directions differ in dimension");
    const auto n_u = static_cast<std::ptrdiff_t>(directions->size());
    const auto levels = static_cast<Eigen::Index>(alphas.size());
    Matrix q(n_u, levels);
#pragma omp parallel if (run_parallel(exec, directions->size() * static_cast<std::size_t>(data.cols()) / 64))
    {
        std::vector<double> sorted(static_cast<std::size_t>(data.cols()));
#pragma omp for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < n_u; ++i) {
            Eigen::Map<Eigen::RowVectorXd>(sorted.data(), data.cols()).noalias() =
                directions->matrix().col(i).transpose() * data;
            std::sort(sorted.begin(), sorted.end());
            for (Eigen::Index k = 0; k < levels; ++k) {
                q(i, k) = type8_sorted(sorted, alphas[static_cast<std::size_t>(k)]);
            }
        }
    }
    return DepthSnapshot(directions, alphas, std::move(q), static_cast<std::uint64_t>(data.cols()));
}

DepthTracker run_incremental(const Matrix& data, const TrackerConfig& config,
                             const DirectionSetPtr& directions) {
    DepthTracker tracker(config, directions);
    for (Eigen::Index j = 0; j < data.cols(); ++j) tracker.observe(data.col(j));
    return tracker;
}

OfflineComparison run_offline_comparison(const OfflineSetup& setup) {
    const GaussianModel truth(Vector::Zero(setup.dim), covariance_for(setup.dim, setup.ar_rate));
    StreamSpec spec;
    spec.dim = setup.dim;
    spec.length = setup.sample_size;
    spec.seed = derive_seed(setup.seed, 1);
    spec.mu = truth.mean();
    spec.sigma = truth.covariance();
    const Matrix data = generate(spec);

    const TrackerConfig config = decay_config(setup.dim, setup.n_u, setup.alphas, setup.seed);
    const auto directions = std::make_shared<const DirectionSet>(make_directions(config));
    const MetricRays rays =
        make_metric_rays(truth.mean(),
                         setup.n_rays ? setup.n_rays : default_ray_count(setup.dim),
                         derive_seed(setup.seed, 3));

    OfflineComparison out;
    auto start = Clock::now();
    const DepthSnapshot offline = offline_snapshot(data, directions, setup.alphas, Exec::serial);
    out.offline_seconds = seconds_since(start);

    start = Clock::now();
    const DepthTracker tracker = run_incremental(data, config, directions);
    out.incremental_seconds = seconds_since(start);

    out.offline = evaluate_gaussian(offline, truth, rays);
    out.incremental = evaluate_gaussian(tracker.snapshot(), truth, rays);
    return out;
}

std::vector<std::uint64_t> bench_checkpoints(std::uint64_t cap) {
    std::vector<std::uint64_t> out;
    for (double c = 100.0; c < static_cast<double>(cap); c *= 1.5) {
        out.push_back(static_cast<std::uint64_t>(c));
    }
    out.push_back(cap);
    return out;
}

BenchOutcome run_bench_cell(const BenchSetup& setup) {
    const GaussianModel truth(Vector::Zero(setup.dim), covariance_for(setup.dim, setup.ar_rate));
    StreamSpec spec;
    spec.dim = setup.dim;
    spec.length = setup.cap;
    spec.seed = derive_seed(setup.seed, 1);
    spec.mu = truth.mean();
    spec.sigma = truth.covariance();
    StaticStream stream(spec);

    TrackerConfig config = decay_config(setup.dim, setup.n_u, setup.alphas, setup.seed);
    config.exec = Exec::serial;
    DepthTracker tracker(config);
    const MetricRays rays = make_metric_rays(
        truth.mean(), setup.n_rays ? setup.n_rays : default_ray_count(setup.dim), derive_seed(setup.seed, 3));
    const DepthFunction depth = gaussian_depth_function(truth);

    BenchOutcome out;
    out.best_made = std::numeric_limits<double>::infinity();
    double loop_seconds = 0.0;
    for (std::uint64_t checkpoint : bench_checkpoints(setup.cap)) {
        // Generation stays outside the timed loop.
        Matrix batch(setup.dim, static_cast<Eigen::Index>(checkpoint - tracker.observations()));
        for (Eigen::Index j = 0; j < batch.cols(); ++j) batch.col(j) = stream.next()->x;
        const auto start = Clock::now();
        for (Eigen::Index j = 0; j < batch.cols(); ++j) tracker.observe(batch.col(j));
        loop_seconds += seconds_since(start);

        const LevelErrors e = compute_made(tracker.snapshot(), depth, rays);
        out.observations = checkpoint;
        out.made = e.unbounded ? std::numeric_limits<double>::infinity() : e.mean;
        out.unbounded = e.unbounded;
        out.best_made = std::min(out.best_made, out.made);
        if (out.made < setup.target) {
            out.converged = true;
            break;
        }
    }
    const double levels = static_cast<double>(setup.alphas.size());
    out.seconds = loop_seconds;
    out.seconds_per_region = loop_seconds / levels;
    out.region_updates_per_ms =
        loop_seconds > 0.0 ? static_cast<double>(out.observations) * levels / (loop_seconds * 1e3) : 0.0;
    return out;
}

double measure_throughput(int dim, std::size_t n_u, std::size_t levels, std::uint64_t observations,
                          Exec exec) {
    if (levels < 1) throw ParameterError("need at least one level");
    TrackerConfig config;
    config.dim = dim;
    config.n_u = n_u;
    config.alphas.clear();
    for (std::size_t k = 1; k <= levels; ++k) {
        config.alphas.push_back(0.45 * static_cast<double>(k) / static_cast<double>(levels));
    }
    config.schedule = StepSchedule::constant(0.01);
    config.exec = exec;
    DepthTracker tracker(config);

    Rng rng(derive_seed(config.seed, 9));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix data(dim, 4096);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        for (int i = 0; i < dim; ++i) data(i, j) = normal(rng);
    }
    for (std::size_t j = 0; j < config.warmup; ++j) tracker.observe(data.col(static_cast<Eigen::Index>(j)));

    const auto start = Clock::now();
    for (std::uint64_t j = 0; j < observations; ++j) {
        tracker.observe(data.col(static_cast<Eigen::Index>(j % 4096)));
    }
    const double ms = seconds_since(start) * 1e3;
    return static_cast<double>(observations * levels) / ms;
}

TrackingOutcome run_tracking(const TrackingSetup& setup) {
    StreamSpec spec;
    spec.kind = StreamKind::dynamic_gaussian;
    spec.dim = setup.dim;
    spec.period = setup.period;
    spec.length = static_cast<std::uint64_t>(std::llround(setup.period)) * setup.periods;
    spec.seed = derive_seed(setup.seed, 1);
    DynamicStream stream(spec);

    TrackerConfig config;
    config.dim = setup.dim;
    config.n_u = setup.n_u;
    config.alphas = setup.alphas;
    config.direction_mode = setup.mode;
    config.candidate_factor = setup.candidate_factor;
    config.schedule = StepSchedule::constant(setup.lambda);
    config.offset_scale = setup.offset_scale;
    config.seed = setup.seed;
    config.exec = Exec::serial;
    DepthTracker tracker(config);

    const auto ray_dirs = std::make_shared<const DirectionSet>(sample_uniform_directions(
        setup.dim, setup.n_rays ? setup.n_rays : default_ray_count(setup.dim), derive_seed(setup.seed, 3)));
    const auto every = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(setup.period)) / setup.checkpoints_per_period);
    const auto burn_in = static_cast<std::uint64_t>(std::llround(setup.period));

    TrackingOutcome out;
    double seconds = 0.0;
    double made_sum = 0.0;
    double ed_sum = 0.0;
    while (auto obs = stream.next()) {
        const auto start = Clock::now();
        tracker.observe(obs->x);
        seconds += seconds_since(start);
        if (obs->n <= burn_in || obs->n % every != 0 || !tracker.ready()) continue;

        const GaussianModel truth = stream.model_at(obs->n);
        const MetricRays rays{truth.mean(), ray_dirs};
        const ErrorReport r = evaluate_gaussian(tracker.snapshot(), truth, rays, Exec::serial);
        out.series.push_back({obs->n, r.made, r.ed});
        made_sum += r.made;
        ed_sum += r.ed;
    }
    if (out.series.empty()) throw ParameterError("tracking run too short to score");
    out.mean_made = made_sum / static_cast<double>(out.series.size());
    out.mean_ed = ed_sum / static_cast<double>(out.series.size());
    out.seconds = seconds;
    return out;
}

std::vector<LambdaScore> lambda_grid(TrackingSetup setup, const std::vector<double>& lambdas,
                                     const std::vector<std::uint64_t>& seeds) {
    std::vector<LambdaScore> out(lambdas.size());
    const auto cells = static_cast<std::ptrdiff_t>(lambdas.size() * seeds.size());
    std::vector<double> made(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < cells; ++c) {
        TrackingSetup s = setup;
        s.lambda = lambdas[static_cast<std::size_t>(c) / seeds.size()];
        s.seed = seeds[static_cast<std::size_t>(c) % seeds.size()];
        made[static_cast<std::size_t>(c)] = run_tracking(s).mean_made;
    }
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        out[l].lambda = lambdas[l];
        out[l].per_seed.assign(made.begin() + static_cast<std::ptrdiff_t>(l * seeds.size()),
                               made.begin() + static_cast<std::ptrdiff_t>((l + 1) * seeds.size()));
        out[l].median_made = median(out[l].per_seed);
    }
    return out;
}

const LambdaScore& best_lambda(const std::vector<LambdaScore>& scores) {
    if (scores.empty()) throw InputError("empty lambda grid");
    return *std::min_element(scores.begin(), scores.end(), [](const LambdaScore& a, const LambdaScore& b) {
        return a.median_made < b.median_made;
    });
}

std::vector<double> default_lambda_grid() {
    return {0.002, 0.003, 0.005, 0.0075, 0.01, 0.015, 0.02, 0.03, 0.05, 0.075, 0.1};
}

std::vector<std::uint64_t> label_changes(const std::vector<int>& labels) {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] != labels[i - 1]) out.push_back(i + 1);
    }
    return out;
}

LabeledStream make_regime_stream(std::uint64_t seed, std::size_t per_regime, std::size_t regimes) {
    constexpr int dim = 3;
    Matrix pos(dim, dim);
    pos << 1.0, 0.8, 0.64, 0.8, 1.0, 0.8, 0.64, 0.8, 1.0;
    Matrix neg(dim, dim);
    neg << 1.0, -0.6, 0.36, -0.6, 1.0, -0.6, 0.36, -0.6, 1.0;
    const Matrix eye = Matrix::Identity(dim, dim);

    struct Regime {
        Vector mu;
        Matrix sigma;
        bool exponential;  // centred exponential margins with the same mean/covariance as sigma=scale^2 I
    };
    const std::vector<Regime> cycle{
        {Vector::Zero(dim), eye, false},
        {Eigen::Vector3d(1.2, 0.0, 0.0), eye, false},
        {Eigen::Vector3d(1.2, 0.0, 0.0), pos, false},
        {Vector::Zero(dim), 2.25 * eye, false},
        {Vector::Zero(dim), 2.25 * eye, true},
        {Eigen::Vector3d(-1.0, 1.0, 0.0), eye, false},
        {Vector::Zero(dim), neg, false},
        {Vector::Zero(dim), eye, false},
    };

    LabeledStream out;
    out.data.resize(dim, static_cast<Eigen::Index>(per_regime * regimes));
    out.labels.reserve(per_regime * regimes);
    Rng rng(derive_seed(seed, 303));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    Eigen::Index col = 0;
    for (std::size_t r = 0; r < regimes; ++r) {
        const Regime& g = cycle[r % cycle.size()];
        const Matrix chol = Eigen::LLT<Matrix>(g.sigma).matrixL();
        const double scale = std::sqrt(g.sigma(0, 0));
        for (std::size_t j = 0; j < per_regime; ++j, ++col) {
            Vector x(dim);
            if (g.exponential) {
                for (int i = 0; i < dim; ++i) x[i] = g.mu[i] + scale * (expo(rng) - 1.0);
            } else {
                Vector z(dim);
                for (int i = 0; i < dim; ++i) z[i] = normal(rng);
                x = g.mu + chol * z;
            }
            out.data.col(col) = x;
            out.labels.push_back(static_cast<int>(r));
        }
    }
    out.changes = label_changes(out.labels);
    return out;
}

DetectorParams regime_detector_params(std::uint64_t seed) {
    DetectorParams p;
    p.dim = 3;
    p.alphas = {0.05, 0.2, 0.4};
    p.n_u = 20;
    p.direction_mode = DirectionMode::equidistant;
    // The floor acts on shifted coordinates, so its additive size is
    // lambda_min * (offset + q); 0.004 keeps that near 0.03 for unit-scale data.
    p.lambda_min = 0.004;
    p.delta = 0.01;
    p.h = 200;
    p.eta = 3.0;
    p.thin = 5;
    p.warmup_mute = 300;
    p.n_rays = 500;
    p.seed = seed;
    return p;
}

}  // namespace tdepth

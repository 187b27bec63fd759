#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdepth/changedetect.hpp"
#include "tdepth/csv.hpp"
#include "tdepth/error.hpp"
#include "tdepth/experiments.hpp"

using namespace tdepth;

namespace {

using Clock = std::chrono::steady_clock;

const std::map<std::string, StreamKind> kStreamKinds{
    {"static_gaussian", StreamKind::static_gaussian},
    {"static_lognormal", StreamKind::static_lognormal},
    {"dynamic_gaussian", StreamKind::dynamic_gaussian},
};

const std::map<std::string, DirectionMode> kDirectionModes{
    {"uniform", DirectionMode::uniform},
    {"equidistant", DirectionMode::equidistant},
};

const std::map<std::string, Estimator> kEstimators{
    {"incremental", Estimator::incremental},
    {"offline_type8", Estimator::offline_type8},
};

// identity | rho:R (bivariate) | ar:RATE
Matrix parse_covariance(const std::string& text, int dim) {
    if (text == "identity") return Matrix::Identity(dim, dim);
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string key = text.substr(0, colon);
        double value = 0.0;
        try {
            value = std::stod(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw ParameterError("bad covariance value in '" + text + "'");
        }
        if (key == "ar") return ar_covariance(dim, value);
        if (key == "rho") {
            if (dim != 2) throw ParameterError("covariance rho:R is bivariate; use --dim 2");
            return bivariate_covariance(value);
        }
    }
    throw ParameterError("unknown covariance '" + text + "' (identity, rho:R, ar:RATE)");
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

template <class Map>
void add_enum(CLI::App* app, const std::string& name, typename Map::mapped_type& target, const Map& map,
              const std::string& help) {
    app->add_option(name, target, help)
        ->transform(CLI::CheckedTransformer(map, CLI::ignore_case))
        ->capture_default_str();
}

struct StreamOptions {
    std::string kind = "static_gaussian";
    int dim = 2;
    std::uint64_t n = 1000;
    double period = 1000.0;
    std::string cov = "identity";
};

void add_stream_options(CLI::App* app, StreamOptions& o) {
    app->add_option("--kind", o.kind, "static_gaussian, static_lognormal or dynamic_gaussian")
        ->check(CLI::IsMember({"static_gaussian", "static_lognormal", "dynamic_gaussian"}))
        ->capture_default_str();
    app->add_option("--dim", o.dim, "dimension p")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--n", o.n, "number of observations")->capture_default_str();
    app->add_option("--period", o.period, "period T of the dynamic stream")->capture_default_str();
    app->add_option("--cov", o.cov, "identity, rho:R or ar:RATE")->capture_default_str();
}

StreamSpec make_spec(const StreamOptions& o, std::uint64_t seed) {
    StreamSpec spec;
    spec.kind = kStreamKinds.at(o.kind);
    spec.dim = o.dim;
    spec.length = o.n;
    spec.period = o.period;
    spec.seed = seed;
    if (spec.kind != StreamKind::dynamic_gaussian) {
        spec.mu = Vector::Zero(o.dim);
        spec.sigma = parse_covariance(o.cov, o.dim);
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
    StreamOptions stream;
    bool regimes = false;
    std::size_t per_regime = 2000;
    std::size_t regime_count = 8;
    std::string out = "-";
};

void run_gen(const GenOptions& o, std::uint64_t seed) {
    CsvWriter out(o.out);
    if (o.regimes) {
        const LabeledStream s = make_regime_stream(seed, o.per_regime, o.regime_count);
        std::vector<std::string> header{"n"};
        for (Eigen::Index i = 0; i < s.data.rows(); ++i) header.push_back("x" + std::to_string(i + 1));
        header.emplace_back("label");
        out.row(header);
        for (Eigen::Index j = 0; j < s.data.cols(); ++j) {
            std::vector<std::string> row{std::to_string(j + 1)};
            for (Eigen::Index i = 0; i < s.data.rows(); ++i) row.push_back(fmt(s.data(i, j)));
            row.push_back(std::to_string(s.labels[static_cast<std::size_t>(j)]));
            out.row(row);
        }
        out.flush();
        return;
    }
    const StreamSpec spec = make_spec(o.stream, seed);
    std::vector<std::string> header{"n"};
    for (int i = 0; i < spec.dim; ++i) header.push_back("x" + std::to_string(i + 1));
    out.row(header);
    auto write = [&](const IndexedObservation& obs) {
        std::vector<std::string> row{std::to_string(obs.n)};
        for (Eigen::Index i = 0; i < obs.x.size(); ++i) row.push_back(fmt(obs.x[i]));
        out.row(row);
    };
    if (spec.kind == StreamKind::dynamic_gaussian) {
        DynamicStream stream(spec);
        while (auto obs = stream.next()) write(*obs);
    } else {
        StaticStream stream(spec);
        while (auto obs = stream.next()) write(*obs);
    }
    out.flush();
}

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
    StreamOptions stream;
    std::string input;
    Estimator estimator = Estimator::incremental;
    std::size_t n_u = 50;
    DirectionMode mode = DirectionMode::uniform;
    std::size_t candidate_factor = 10;
    std::vector<double> alphas{0.05, 0.2, 0.4};
    std::size_t n_rays = 0;
    std::string metrics = "auto";
    std::size_t mc_samples = 50000;
    std::size_t mc_dirs = 360;
    std::string out = "-";
    std::string contour;
    int contour_resolution = 256;
};

void run_estimate(const EstimateOptions& o, std::uint64_t seed) {
    StreamSpec spec = make_spec(o.stream, derive_seed(seed, 1));
    if (spec.kind == StreamKind::dynamic_gaussian) {
        throw ParameterError("estimate scores against a static model; use `track` for dynamic streams");
    }
    const bool lognormal = spec.kind == StreamKind::static_lognormal;
    bool want_made = true;
    bool want_ed = !lognormal;
    if (o.metrics == "made") {
        want_ed = false;
    } else if (o.metrics == "ed" || o.metrics == "made,ed") {
        want_made = o.metrics != "ed";
        if (lognormal) {
            throw ParameterError(
                "oracle unavailable: ED needs the analytic contour, which exists only for Gaussian "
                "models; request --metrics made for lognormal data");
        }
        want_ed = true;
    } else if (o.metrics != "auto") {
        throw ParameterError("--metrics must be auto, made, ed or made,ed");
    }

    Matrix data;
    if (!o.input.empty()) {
        data = read_stream_csv(o.input);
        if (data.rows() != spec.dim) {
            throw InputError("input has " + std::to_string(data.rows()) + " columns but --dim is " +
                             std::to_string(spec.dim));
        }
    } else {
        if (spec.length == 0) throw InputError("no observations: --n is 0");
        data = generate(spec);
    }
    if (data.cols() == 0) throw InputError("no observations to estimate from");

    TrackerConfig config;
    config.dim = spec.dim;
    config.alphas = o.alphas;
    config.n_u = o.n_u;
    config.direction_mode = o.mode;
    config.candidate_factor = o.candidate_factor;
    config.seed = seed;
    config.validate();
    const auto directions = std::make_shared<const DirectionSet>(make_directions(config));

    const auto start = Clock::now();
    std::optional<DepthSnapshot> snapshot;
    if (o.estimator == Estimator::offline_type8) {
        snapshot = offline_snapshot(data, directions, o.alphas);
    } else {
        if (data.cols() < static_cast<Eigen::Index>(config.warmup)) {
            throw InputError("incremental estimation needs at least " + std::to_string(config.warmup) +
                             " observations");
        }
        snapshot = run_incremental(data, config, directions).snapshot();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    const std::size_t n_rays = o.n_rays ? o.n_rays : default_ray_count(spec.dim);
    const GaussianModel normal(spec.mu, spec.sigma);
    ErrorReport report;
    report.alphas = o.alphas;
    if (lognormal) {
        // exp() maps the normal centre to the vector of ones; rays start there.
        const Matrix chol = normal.cholesky();
        MonteCarloModel mc(
            [&](Rng& rng) {
                std::normal_distribution<double> z(0.0, 1.0);
                Vector v(spec.dim);
                for (int i = 0; i < spec.dim; ++i) v[i] = z(rng);
                return Vector((chol * v).array().exp());
            },
            spec.dim, o.mc_samples, derive_seed(seed, 5));
        const MetricRays rays = make_metric_rays(Vector::Ones(spec.dim), n_rays, derive_seed(seed, 3));
        const LevelErrors e = compute_made(*snapshot, monte_carlo_depth_function(mc, o.mc_dirs, derive_seed(seed, 6)), rays);
        report.made_per_alpha = e.per_alpha;
        report.made = e.mean;
        report.unbounded = e.unbounded;
    } else {
        const MetricRays rays = make_metric_rays(normal.mean(), n_rays, derive_seed(seed, 3));
        report = evaluate_gaussian(*snapshot, normal, rays);
    }

    CsvWriter out(o.out);
    out.row({"estimator", "level", "alpha", "made", "ed", "unbounded_rays", "cpu_seconds"});
    const std::string name = o.estimator == Estimator::incremental ? "incremental" : "offline_type8";
    const std::string none = "nan";
    for (std::size_t k = 0; k < o.alphas.size(); ++k) {
        out.row({name, std::to_string(k), fmt(o.alphas[k]), want_made ? fmt(report.made_per_alpha[k]) : none,
                 want_ed ? fmt(report.ed_per_alpha[k]) : none, std::to_string(report.unbounded), fmt(seconds)});
    }
    out.row({name, "mean", "", want_made ? fmt(report.made) : none, want_ed ? fmt(report.ed) : none,
             std::to_string(report.unbounded), fmt(seconds)});
    out.flush();

    if (!o.contour.empty()) {
        if (spec.dim != 2) throw ParameterError("contour export is only available for p = 2");
        CsvWriter c(o.contour);
        c.row({"alpha", "vertex", "x1", "x2"});
        const Vector center = lognormal ? Vector::Ones(2) : normal.mean();
        for (std::size_t k = 0; k < snapshot->levels(); ++k) {
            const auto poly = contour_polyline_2d(snapshot->envelope(k), o.contour_resolution, center);
            for (std::size_t v = 0; v < poly.size(); ++v) {
                c.row({fmt(o.alphas[k]), std::to_string(v), fmt(poly[v].x()), fmt(poly[v].y())});
            }
        }
        c.flush();
    }
}

// ---------------------------------------------------------------- track

struct TrackOptions {
    TrackingSetup setup;
    std::vector<double> lambdas;
    bool grid = false;
    std::size_t seeds = 1;
    std::string out = "-";
    std::string grid_out;
};

void run_track(TrackOptions o, std::uint64_t seed) {
    o.setup.seed = seed;
    if (o.grid || !o.lambdas.empty()) {
        const std::vector<double> lambdas = o.lambdas.empty() ? default_lambda_grid() : o.lambdas;
        std::vector<std::uint64_t> seeds;
        for (std::size_t s = 0; s < o.seeds; ++s) seeds.push_back(derive_seed(seed, 1000 + s));
        const auto scores = lambda_grid(o.setup, lambdas, seeds);
        CsvWriter g(o.grid_out.empty() ? "-" : o.grid_out);
        g.row({"lambda", "median_made", "seeds"});
        for (const auto& s : scores) g.row({fmt(s.lambda), fmt(s.median_made), std::to_string(s.per_seed.size())});
        g.flush();
        o.setup.lambda = best_lambda(scores).lambda;
        std::cerr << "best lambda " << fmt(o.setup.lambda) << " median MADE "
                  << fmt(best_lambda(scores).median_made) << "\n";
        if (o.grid_out.empty()) return;
    }
    const TrackingOutcome r = run_tracking(o.setup);
    CsvWriter out(o.out);
    out.row({"n", "made", "ed"});
    for (const auto& p : r.series) out.row({fmt(p.n), fmt(p.made), fmt(p.ed)});
    out.flush();
    std::cerr << "lambda " << fmt(o.setup.lambda) << " mean MADE " << fmt(r.mean_made) << " mean ED "
              << fmt(r.mean_ed) << " cpu_seconds " << fmt(r.seconds) << "\n";
}

// ---------------------------------------------------------------- detect

struct DetectOptions {
    std::string input;
    bool wisdm = false;
    DetectorParams params;
    std::uint64_t horizon = 0;
    std::string events = "-";
    std::string report;
};

void run_detect(DetectOptions o, std::uint64_t seed) {
    if (o.input.empty()) throw ParameterError("detect needs --input (labelled CSV or --wisdm file)");
    const LabeledData d = read_labeled_csv(o.input, o.wisdm);
    if (d.skipped) std::cerr << "skipped " << d.skipped << " malformed rows of " << d.rows << "\n";
    o.params.dim = static_cast<int>(d.data.rows());
    o.params.seed = seed;
    const auto events = run_detector(o.params, d.data);
    const auto truth = label_changes(d.labels);
    std::vector<std::uint64_t> times;
    for (const auto& e : events) times.push_back(e.t);
    const ScoreReport s = score_detections(times, truth, o.horizon);

    CsvWriter ev(o.events);
    ev.row({"t", "ed_value", "threshold"});
    for (const auto& e : events) ev.row({fmt(e.t), fmt(e.ed_value), fmt(e.threshold)});
    ev.flush();

    CsvWriter rep(o.report.empty() ? "-" : o.report);
    if (o.report.empty() && o.events == "-") std::cout << "\n";
    rep.row({"precision", "recall", "f1", "mean_detection_delay", "correct", "detections", "true_changes",
             "skipped_rows"});
    rep.row({fmt(s.precision), fmt(s.recall), fmt(s.f1), fmt(s.mean_detection_delay), std::to_string(s.correct),
             std::to_string(s.detections), std::to_string(s.true_changes), std::to_string(d.skipped)});
    rep.flush();
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
    std::vector<int> dims{2};
    std::vector<std::size_t> n_us{8};
    std::vector<double> targets{0.05};
    std::string cov = "identity";
    std::vector<double> alphas{0.05, 0.2, 0.4};
    std::uint64_t cap = 1000000;
    std::size_t seeds = 1;
    std::size_t n_rays = 0;
    std::string out = "-";
};

void run_bench(const BenchOptions& o, std::uint64_t seed) {
    double ar_rate = 0.0;
    if (o.cov.rfind("ar:", 0) == 0) {
        ar_rate = std::stod(o.cov.substr(3));
        if (!(ar_rate > 0.0)) throw ParameterError("ar rate must be positive");
    } else if (o.cov != "identity") {
        throw ParameterError("bench supports --cov identity or ar:RATE");
    }
    struct Cell {
        BenchSetup setup;
        BenchOutcome outcome;
    };
    std::vector<Cell> cells;
    for (int p : o.dims) {
        for (std::size_t n_u : o.n_us) {
            for (double target : o.targets) {
                for (std::size_t s = 0; s < o.seeds; ++s) {
                    BenchSetup b;
                    b.dim = p;
                    b.n_u = n_u;
                    b.target = target;
                    b.ar_rate = ar_rate;
                    b.alphas = o.alphas;
                    b.cap = o.cap;
                    b.n_rays = o.n_rays;
                    b.seed = derive_seed(seed, 1000 + s);
                    cells.push_back({b, {}});
                }
            }
        }
    }
    const auto count = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
        auto& cell = cells[static_cast<std::size_t>(c)];
        cell.outcome = run_bench_cell(cell.setup);
    }
    CsvWriter out(o.out);
    out.row({"p", "n_u", "target", "seed", "converged", "observations", "made", "best_made",
             "cpu_seconds_per_region", "updates_per_ms"});
    for (const auto& c : cells) {
        out.row({std::to_string(c.setup.dim), std::to_string(c.setup.n_u), fmt(c.setup.target), fmt(c.setup.seed),
                 c.outcome.converged ? "1" : "0", fmt(c.outcome.observations), fmt(c.outcome.made),
                 fmt(c.outcome.best_made), fmt(c.outcome.seconds_per_region), fmt(c.outcome.region_updates_per_ms)});
    }
    out.flush();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming Tukey depth contours: generation, estimation, tracking, change detection"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI/TOML config file; sections are named after subcommands");
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "top-level seed")->capture_default_str();

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "write a synthetic stream as CSV");
    add_stream_options(gen_cmd, gen.stream);
    gen_cmd->add_flag("--regimes", gen.regimes, "labelled 3-D regime stream (n,x1,x2,x3,label)");
    gen_cmd->add_option("--per-regime", gen.per_regime, "observations per regime")->capture_default_str();
    gen_cmd->add_option("--regime-count", gen.regime_count, "number of regimes")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "output CSV ('-' for stdout)")->capture_default_str();

    EstimateOptions est;
    auto* est_cmd = app.add_subcommand("estimate", "estimate depth contours and score them");
    add_stream_options(est_cmd, est.stream);
    est_cmd->add_option("--input", est.input, "stream CSV (n,x1..xp); --kind/--cov/--dim declare its model");
    add_enum(est_cmd, "--estimator", est.estimator, kEstimators, "incremental or offline_type8");
    est_cmd->add_option("--n-u", est.n_u, "number of directions")->capture_default_str();
    add_enum(est_cmd, "--directions", est.mode, kDirectionModes, "uniform or equidistant");
    est_cmd->add_option("--candidate-factor", est.candidate_factor)->capture_default_str();
    est_cmd->add_option("--alphas", est.alphas)->delimiter(',')->capture_default_str();
    est_cmd->add_option("--n-rays", est.n_rays, "metric rays (0 = default for p)")->capture_default_str();
    est_cmd->add_option("--metrics", est.metrics, "auto, made, ed or made,ed")->capture_default_str();
    est_cmd->add_option("--mc-samples", est.mc_samples, "Monte Carlo sample for lognormal truth")->capture_default_str();
    est_cmd->add_option("--mc-dirs", est.mc_dirs, "Monte Carlo directions for lognormal truth")->capture_default_str();
    est_cmd->add_option("--out", est.out, "error report CSV")->capture_default_str();
    est_cmd->add_option("--contour", est.contour, "contour polyline CSV (p = 2)");
    est_cmd->add_option("--contour-resolution", est.contour_resolution)->capture_default_str();

    TrackOptions trk;
    auto* trk_cmd = app.add_subcommand("track", "track contours of the rotating Gaussian stream");
    trk_cmd->add_option("--dim", trk.setup.dim)->capture_default_str();
    trk_cmd->add_option("--period", trk.setup.period)->capture_default_str();
    trk_cmd->add_option("--periods", trk.setup.periods, "stream length in periods")->capture_default_str();
    trk_cmd->add_option("--n-u", trk.setup.n_u)->capture_default_str();
    add_enum(trk_cmd, "--directions", trk.setup.mode, kDirectionModes, "uniform or equidistant");
    trk_cmd->add_option("--candidate-factor", trk.setup.candidate_factor)->capture_default_str();
    trk_cmd->add_option("--alphas", trk.setup.alphas)->delimiter(',')->capture_default_str();
    trk_cmd->add_option("--lambda", trk.setup.lambda, "constant step size")->capture_default_str();
    trk_cmd->add_option("--lambda-grid", trk.lambdas, "comma-separated grid to search")->delimiter(',');
    trk_cmd->add_flag("--grid", trk.grid, "search the default lambda grid");
    trk_cmd->add_option("--seeds", trk.seeds, "seeds per grid cell")->capture_default_str();
    trk_cmd->add_option("--checkpoints", trk.setup.checkpoints_per_period, "checkpoints per period")
        ->capture_default_str();
    trk_cmd->add_option("--n-rays", trk.setup.n_rays)->capture_default_str();
    trk_cmd->add_option("--out", trk.out, "time series CSV")->capture_default_str();
    trk_cmd->add_option("--grid-out", trk.grid_out, "grid CSV; when set the best lambda is also run");

    DetectOptions det;
    auto* det_cmd = app.add_subcommand("detect", "change detection on a labelled stream");
    det_cmd->add_option("--input", det.input, "CSV n,x1..xp,label")->required();
    det_cmd->add_flag("--wisdm", det.wisdm, "input is raw WISDM user,activity,timestamp,x,y,z");
    det_cmd->add_option("--alphas", det.params.alphas)->delimiter(',')->capture_default_str();
    det_cmd->add_option("--n-u", det.params.n_u)->capture_default_str();
    det_cmd->add_option("--lambda-min", det.params.lambda_min)->capture_default_str();
    det_cmd->add_option("--delta", det.params.delta)->capture_default_str();
    det_cmd->add_option("--lookback", det.params.h, "lookback h in observations")->capture_default_str();
    det_cmd->add_option("--eta", det.params.eta)->capture_default_str();
    det_cmd->add_option("--thin", det.params.thin, "snapshot every s observations")->capture_default_str();
    det_cmd->add_option("--mute", det.params.warmup_mute, "mute window (0 = h + warm-up)")->capture_default_str();
    det_cmd->add_option("--min-statistic", det.params.min_statistic, "ED values collected before testing")
        ->capture_default_str();
    det_cmd->add_option("--n-rays", det.params.n_rays)->capture_default_str();
    det_cmd->add_option("--horizon", det.horizon, "ignore events after this index (0 = none)")->capture_default_str();
    det_cmd->add_option("--events", det.events, "events CSV")->capture_default_str();
    det_cmd->add_option("--report", det.report, "score CSV (default stdout)");

    BenchOptions bch;
    auto* bch_cmd = app.add_subcommand("bench", "observations needed to reach a MADE target");
    bch_cmd->add_option("--dims", bch.dims)->delimiter(',')->capture_default_str();
    bch_cmd->add_option("--n-u", bch.n_us)->delimiter(',')->capture_default_str();
    bch_cmd->add_option("--targets", bch.targets)->delimiter(',')->capture_default_str();
    bch_cmd->add_option("--cov", bch.cov, "identity or ar:RATE")->capture_default_str();
    bch_cmd->add_option("--alphas", bch.alphas)->delimiter(',')->capture_default_str();
    bch_cmd->add_option("--cap", bch.cap, "observation cap")->capture_default_str();
    bch_cmd->add_option("--seeds", bch.seeds)->capture_default_str();
    bch_cmd->add_option("--n-rays", bch.n_rays)->capture_default_str();
    bch_cmd->add_option("--out", bch.out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen_cmd) run_gen(gen, seed);
        if (*est_cmd) run_estimate(est, seed);
        if (*trk_cmd) run_track(trk, seed);
        if (*det_cmd) run_detect(det, seed);
        if (*bch_cmd) run_bench(bch, seed);
    } catch (const Error& e) {
        std::cerr << "tdepth: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "tdepth: unexpected failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

#include "rftune_tools/experiments.hpp"

#include "rftune/ces.hpp"
#include "rftune/csv.hpp"
#include "rftune/dynamics.hpp"
#include "rftune/eki.hpp"
#include "rftune/emulator.hpp"
#include "rftune/gsa.hpp"
#include "rftune/parallel.hpp"
#include "rftune/random.hpp"
#include "rftune/serialization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

namespace rftune::tools {

using nlohmann::json;

namespace {

constexpr std::uint64_t kRepeatTag = 0x726570ULL;
constexpr std::uint64_t kTruthTag = 0x7472757468ULL;
constexpr std::uint64_t kMapTag = 0x6d6170ULL;

const char* kVersion = "0.3.0";

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vector column_mean(const Matrix& m) { return m.colwise().mean().transpose(); }

Vector column_std(const Matrix& m) {
    if (m.rows() < 2) return Vector::Zero(m.cols());
    const Matrix c = m.rowwise() - m.colwise().mean();
    return (c.colwise().squaredNorm() / static_cast<double>(m.rows() - 1)).cwiseSqrt().transpose();
}

std::vector<std::string> indexed(const std::string& prefix, int n) {
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void append_trace(std::vector<std::array<double, 6>>& rows, int repeat, const TrainedEmulator& trained) {
    if (!trained.tuning) return;
    for (const auto& r : trained.tuning->eki.trace)
        rows.push_back({static_cast<double>(repeat), static_cast<double>(r.iteration), r.time, r.timestep, r.misfit,
                        static_cast<double>(r.resampled)});
}

Table trace_table(const std::vector<std::array<double, 6>>& rows) {
    Table t;
    t.columns = {"repeat", "iteration", "time", "timestep", "misfit", "resampled"};
    t.rows.resize(static_cast<Index>(rows.size()), 6);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < 6; ++j) t.rows(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return t;
}

json indices_json(const Vector& first, const Vector& total) { return {{"first", to_std(first)}, {"total", to_std(total)}}; }

// --- global sensitivity ------------------------------------------------------

ExperimentResult run_gsa(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool is_ishigami = c.experiment == ExperimentTag::ishigami;
    const int d = is_ishigami ? 3 : c.dimension;
    Vector lo, hi, coeffs;
    std::function<double(const Vector&)> truth;
    AnalyticIndices analytic;
    if (is_ishigami) {
        lo = Vector::Constant(d, -std::numbers::pi);
        hi = Vector::Constant(d, std::numbers::pi);
        truth = [](const Vector& x) { return ishigami(x); };
        analytic = analytic_ishigami();
    } else {
        lo = Vector::Zero(d);
        hi = Vector::Ones(d);
        coeffs = sobol_g_coefficients(d);
        truth = [coeffs](const Vector& x) { return sobol_g(x, coeffs); };
        analytic = analytic_sobol_g(coeffs);
    }

    const SobolDesign design = make_design(d, c.n_base);
    const Matrix points = map_to_box(design.stacked(), lo, hi);
    Vector exact(points.rows());
    for (Index i = 0; i < points.rows(); ++i) exact[i] = truth(points.row(i).transpose());
    const SensitivityIndices empirical = estimate_indices(design, exact);

    // Training data: a random subset of the design points with additive noise.
    Rng data_rng = make_stream(c.seed, {stream_tag::data});
    std::vector<Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), data_rng);
    const double noise_std = std::sqrt(c.noise_variance);
    Matrix X(c.n_train, d), Y(c.n_train, 1);
    for (Index n = 0; n < c.n_train; ++n) {
        X.row(n) = points.row(order[static_cast<std::size_t>(n)]);
        Y(n, 0) = exact[order[static_cast<std::size_t>(n)]] + noise_std * standard_normal(data_rng);
    }
    const Matrix noise = Matrix::Constant(1, 1, c.noise_variance);

    Matrix per_repeat(c.repeats, 2 * d + 3);
    std::vector<std::array<double, 6>> trace;
    for (int r = 0; r < c.repeats; ++r) {
        const std::uint64_t seed = mix_seed(c.seed, {kRepeatTag, static_cast<std::uint64_t>(r)});
        const TrainedEmulator trained = train_emulator(X, Y, noise, emulator_options(c, d, 1, seed));
        const Vector pred = trained.emulator.predict_mean(points).col(0);
        const SensitivityIndices s = estimate_indices(design, pred);
        const double rmse = std::sqrt((pred - exact).squaredNorm() / static_cast<double>(pred.size()));
        per_repeat(r, 0) = r;
        per_repeat.block(r, 1, 1, d) = s.first.transpose();
        per_repeat.block(r, 1 + d, 1, d) = s.total.transpose();
        per_repeat(r, 1 + 2 * d) = rmse;
        per_repeat(r, 2 + 2 * d) = trained.emulator.distribution().scale;
        append_trace(trace, r, trained);
    }

    ExperimentResult out;
    const Matrix firsts = per_repeat.block(0, 1, c.repeats, d);
    const Matrix totals = per_repeat.block(0, 1 + d, c.repeats, d);
    out.metrics["dimension"] = d;
    out.metrics["analytic"] = indices_json(analytic.first, analytic.total);
    out.metrics["empirical"] = indices_json(empirical.first, empirical.total);
    out.metrics["emulator"] = {{"first_mean", to_std(column_mean(firsts))},
                               {"first_std", to_std(column_std(firsts))},
                               {"total_mean", to_std(column_mean(totals))},
                               {"total_std", to_std(column_std(totals))},
                               {"rmse_mean", per_repeat.col(1 + 2 * d).mean()}};
    out.metrics["design_points"] = points.rows();
    out.metrics["seconds"] = seconds_since(t0);

    Table repeats;
    repeats.columns = {"repeat"};
    for (const auto& name : indexed("V", d)) repeats.columns.push_back(name);
    for (const auto& name : indexed("TV", d)) repeats.columns.push_back(name);
    repeats.columns.push_back("rmse");
    repeats.columns.push_back("scale");
    repeats.rows = per_repeat;
    out.tables["repeats"] = repeats;
    out.tables["eki_trace"] = trace_table(trace);

    Table training;
    training.columns = indexed("x", d);
    training.columns.push_back("y");
    training.rows.resize(c.n_train, d + 1);
    training.rows << X, Y;
    out.tables["training_data"] = training;
    return out;
}

// --- Lorenz 63 ---------------------------------------------------------------

struct RolloutSummary {
    bool bounded = false;
    Vector ks = Vector::Ones(3);
    double valid_time = 0.0;
    Index steps = 0;
    Trajectory rollout;
};

RolloutSummary assess_rollout(const RFEmulator& em, const Trajectory& truth, Index spin, double bound) {
    RolloutSummary s;
    const Index n = truth.size() - 1;
    const StepMap step = [&em](const Vector& x) { return em.predict_mean(x); };
    try {
        s.rollout = emulator_rollout(step, truth.states.row(0).transpose(), n, truth.dt, bound);
        s.rollout.t0 = truth.t0;
        s.bounded = true;
        s.steps = n;
        s.ks = marginal_cdf_distance(s.rollout.tail(spin), truth.tail(spin));
        s.valid_time = valid_time(s.rollout, truth);
    } catch (const BlowUp& e) {
        s.steps = static_cast<Index>(e.step());
    }
    return s;
}

ExperimentResult run_lorenz(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const Index train_steps = static_cast<Index>(std::llround(c.train_time / c.dt));
    const Index eval_steps = static_cast<Index>(std::llround(c.eval_time / c.dt));
    const Index spin = static_cast<Index>(std::llround(c.spinup / c.dt));
    const Matrix noise = c.noise_variance * Matrix::Identity(3, 3);

    Matrix per_repeat(c.repeats, 13);
    std::vector<std::array<double, 6>> trace;
    ExperimentResult out;
    for (int r = 0; r < c.repeats; ++r) {
        const std::uint64_t seed = mix_seed(c.seed, {kRepeatTag, static_cast<std::uint64_t>(r)});
        Rng data_rng = make_stream(seed, {stream_tag::data});
        Vector x0 = Vector::Ones(3);
        for (Index i = 0; i < 3; ++i) x0[i] += standard_normal(data_rng);
        const Trajectory full = euler_integrate(x0, c.dt, train_steps + eval_steps);
        Trajectory train;
        train.dt = c.dt;
        train.states = full.states.topRows(train_steps + 1);
        const Trajectory truth = full.tail(train_steps);
        const TrainingPairs pairs = make_training_pairs(train, c.n_train, noise, data_rng);

        ExperimentConfig tuned_cfg = c;
        tuned_cfg.tune = true;
        ExperimentConfig untuned_cfg = c;
        untuned_cfg.tune = false;
        const TrainedEmulator tuned = train_emulator(pairs.inputs, pairs.outputs, noise, emulator_options(tuned_cfg, 3, 3, seed));
        const TrainedEmulator untuned =
            train_emulator(pairs.inputs, pairs.outputs, noise, emulator_options(untuned_cfg, 3, 3, seed));
        append_trace(trace, r, tuned);

        const RolloutSummary a = assess_rollout(tuned.emulator, truth, spin, c.bound);
        const RolloutSummary b = assess_rollout(untuned.emulator, truth, spin, c.bound);
        per_repeat.row(r) << r, a.bounded, a.ks.transpose(), a.valid_time, static_cast<double>(a.steps), b.bounded,
            b.ks.transpose(), b.valid_time, static_cast<double>(b.steps);

        if (r == 0) {
            const Index keep = std::min<Index>(truth.size(), 2001);
            Table traj;
            traj.columns = {"t", "x_true", "y_true", "z_true", "x_emulated", "y_emulated", "z_emulated"};
            traj.rows = Matrix::Constant(keep, 7, std::numeric_limits<double>::quiet_NaN());
            for (Index k = 0; k < keep; ++k) {
                traj.rows(k, 0) = truth.time(k);
                traj.rows.block(k, 1, 1, 3) = truth.states.row(k);
                if (a.bounded) traj.rows.block(k, 4, 1, 3) = a.rollout.states.row(k);
            }
            out.tables["trajectory"] = traj;
            if (a.bounded) {
                const Trajectory tt = truth.tail(spin), ta = a.rollout.tail(spin);
                Table cdf;
                cdf.columns = {"value", "cdf_x_true", "cdf_y_true", "cdf_z_true", "cdf_x_emulated", "cdf_y_emulated",
                               "cdf_z_emulated"};
                const Vector grid = Vector::LinSpaced(201, -30.0, 60.0);
                cdf.rows.resize(grid.size(), 7);
                cdf.rows << marginal_cdf_table(tt, grid), marginal_cdf_table(ta, grid).rightCols(3);
                out.tables["marginal_cdf"] = cdf;
            }
        }
    }

    Table repeats;
    repeats.columns = {"repeat",        "tuned_bounded",   "tuned_ks_x",     "tuned_ks_y",    "tuned_ks_z",
                       "tuned_valid_time", "tuned_steps",  "untuned_bounded", "untuned_ks_x", "untuned_ks_y",
                       "untuned_ks_z",  "untuned_valid_time", "untuned_steps"};
    repeats.rows = per_repeat;
    out.tables["repeats"] = repeats;
    out.tables["eki_trace"] = trace_table(trace);

    auto summarize = [&](Index col0) {
        int bounded = 0, skilful = 0;
        for (Index r = 0; r < per_repeat.rows(); ++r) {
            const bool ok = per_repeat(r, col0) > 0.5;
            bounded += ok;
            skilful += ok && per_repeat.block(r, col0 + 1, 1, 3).maxCoeff() <= 0.15;
        }
        return json{{"bounded", bounded},
                    {"bounded_and_ks_below_0.15", skilful},
                    {"mean_max_ks", per_repeat.block(0, col0 + 1, per_repeat.rows(), 3).rowwise().maxCoeff().mean()},
                    {"mean_valid_time", per_repeat.col(col0 + 4).mean()}};
    };
    out.metrics["repeats"] = c.repeats;
    out.metrics["tuned"] = summarize(1);
    out.metrics["untuned"] = summarize(7);
    out.metrics["seconds"] = seconds_since(t0);
    return out;
}

// --- emulator-accelerated inversion -----------------------------------------

struct CesProblem {
    BoundedPrior prior;
    SyntheticMap map;
    /// Forward model on the unconstrained coordinates: the map applied to (phi - mean) / std.
    Vector forward(const Vector& phi) const { return map((phi - prior.mean).cwiseQuotient(prior.stddev)); }
    Vector truth_phi;
    Vector observation;
    Matrix noise;
    Matrix train_inputs;
    Matrix train_outputs;
};

CesProblem make_ces_problem(const ExperimentConfig& c, std::uint64_t seed) {
    CesProblem pb;
    pb.prior = default_physical_prior();
    const int d = static_cast<int>(pb.prior.dim());
    pb.map = make_synthetic_map(d, c.output_dim, mix_seed(seed, {kMapTag}), c.map_gain);
    Rng rng = make_stream(seed, {kTruthTag});
    pb.truth_phi = pb.prior.sample(rng);
    const double s = c.observation_noise_std;
    pb.noise = s * s * Matrix::Identity(c.output_dim, c.output_dim);
    pb.observation = pb.forward(pb.truth_phi) + s * standard_normal(rng, c.output_dim);
    // Calibrate: EKI on the true forward map; every evaluated iterate becomes training data.
    const ForwardMap forward = [&pb](const Vector& phi, Rng&) { return pb.forward(phi); };
    Rng init_rng = make_stream(seed, {stream_tag::prior});
    const Ensemble init = init_ensemble(pb.prior.mean, pb.prior.stddev, c.calibration_ensemble, init_rng);
    EKISettings s_cal;
    s_cal.scheduler = Scheduler::constant;
    s_cal.timestep = 1.0 / c.calibration_iterations;
    s_cal.max_iterations = c.calibration_iterations;
    s_cal.inflation_std = 0.0;
    s_cal.seed = mix_seed(seed, {stream_tag::data});
    s_cal.keep_history = true;
    s_cal.workers = c.workers;
    EKIResult cal = run(forward, init, ObservationSpec(pb.observation, pb.noise), s_cal);
    Matrix last;
    Ensemble final_ensemble = cal.ensemble;
    evaluate_ensemble(final_ensemble, forward, s_cal.seed, c.workers, 0, last);
    cal.member_history.push_back(final_ensemble.members);
    cal.evaluation_history.push_back(last);
    const Index per = c.calibration_ensemble;
    const Index n_cal = per * static_cast<Index>(cal.member_history.size());
    const Index total = n_cal + c.n_train;
    pb.train_inputs.resize(total, d);
    pb.train_outputs.resize(total, c.output_dim);
    for (std::size_t k = 0; k < cal.member_history.size(); ++k) {
        pb.train_inputs.middleRows(static_cast<Index>(k) * per, per) = cal.member_history[k].transpose();
        pb.train_outputs.middleRows(static_cast<Index>(k) * per, per) = cal.evaluation_history[k].transpose();
    }
    // Extra prior draws keep the emulator anchored away from the calibration cloud.
    Rng data_rng = make_stream(seed, {stream_tag::data});
    for (Index n = n_cal; n < total; ++n) {
        const Vector phi = pb.prior.sample(data_rng);
        pb.train_inputs.row(n) = phi.transpose();
        pb.train_outputs.row(n) = pb.forward(phi).transpose();
    }
    return pb;
}

ExperimentResult run_ces(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const CesProblem pb = make_ces_problem(c, c.seed);
    const int d = static_cast<int>(pb.prior.dim());
    const TrainedEmulator trained =
        train_emulator(pb.train_inputs, pb.train_outputs, pb.noise, emulator_options(c, d, c.output_dim, c.seed));
    const RFEmulator& em = trained.emulator;

    const BoundedPrior& prior = pb.prior;
    const Eigen::LLT<Matrix> noise_factor(pb.noise);
    const NegLogDensity exact = [&](const Vector& phi) {
        const Vector r = noise_factor.matrixL().solve(pb.observation - pb.forward(phi));
        return 0.5 * r.squaredNorm() + prior.neg_log_density(phi);
    };
    EmulatedPosterior post;
    post.mean = [&em](const Vector& phi) { return em.predict_mean(phi); };
    if (c.pointwise_covariance)
        post.covariance = [&em, &pb](const Vector& phi) { Matrix g = em.predict_cov(phi); g += pb.noise; return g; };
    post.noise = pb.noise;
    post.observation = pb.observation;
    post.neg_log_prior = [&prior](const Vector& phi) { return prior.neg_log_density(phi); };
    const NegLogDensity emulated = [&post](const Vector& phi) { return emulated_neg_log_posterior(phi, post); };

    // Start at the training input with the smallest exact misfit.
    Index best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (Index n = 0; n < pb.train_inputs.rows(); ++n) {
        const double v = exact(pb.train_inputs.row(n).transpose());
        if (v < best_val) best_val = v, best = n;
    }
    const Vector start = pb.train_inputs.row(best).transpose();

    auto sample = [&](const NegLogDensity& target, std::uint64_t tag) {
        Rng rng = make_stream(c.seed, {stream_tag::mcmc, tag});
        StepTunerOptions opts;
        opts.initial_step = 0.5;
        const StepTuning tuning = tune_step_size(target, start, rng, opts);
        return run_chain(target, tuning.state.theta, tuning.step, c.chain_length, c.burn_in, rng);
    };
    const MCMCChain chain_exact = sample(exact, 0);
    const MCMCChain chain_emulated = sample(emulated, 1);

    const Vector diff = (chain_emulated.mean() - chain_exact.mean()).cwiseQuotient(prior.stddev);
    ExperimentResult out;
    out.metrics["truth_phi"] = to_std(pb.truth_phi);
    out.metrics["exact"] = {{"mean", to_std(chain_exact.mean())},
                            {"std", to_std(chain_exact.covariance().diagonal().cwiseSqrt())},
                            {"acceptance", chain_exact.acceptance_rate()},
                            {"step", chain_exact.step}};
    out.metrics["emulated"] = {{"mean", to_std(chain_emulated.mean())},
                               {"std", to_std(chain_emulated.covariance().diagonal().cwiseSqrt())},
                               {"acceptance", chain_emulated.acceptance_rate()},
                               {"step", chain_emulated.step}};
    out.metrics["mean_difference_prior_std"] = to_std(diff);
    out.metrics["max_abs_mean_difference"] = diff.cwiseAbs().maxCoeff();
    out.metrics["pointwise_covariance"] = c.pointwise_covariance;
    {
        // Emulator error at exact-posterior samples, in units of the observation noise std.
        double err = 0.0, spread = 0.0;
        Index count = 0;
        const Vector center = pb.forward(chain_exact.mean());
        for (Index k = 0; k < chain_exact.samples.rows(); k += 100, ++count) {
            const Vector phi = chain_exact.samples.row(k).transpose();
            const Vector g = pb.forward(phi);
            err += (em.predict_mean(phi) - g).norm();
            spread += (g - center).norm();
        }
        out.metrics["emulator_error_on_posterior"] = err / count / c.observation_noise_std;
        out.metrics["output_spread_on_posterior"] = spread / count / c.observation_noise_std;
        out.metrics["training_points"] = pb.train_inputs.rows();
    }
    out.metrics["seconds"] = seconds_since(t0);

    auto thinned = [&](const MCMCChain& ch, const std::string& name) {
        const Index stride = std::max<Index>(1, ch.samples.rows() / 5000);
        const Index n = ch.samples.rows() / stride;
        Table t;
        t.columns = {"index"};
        for (const auto& nm : prior.names) t.columns.push_back(nm);
        t.rows.resize(n, d + 1);
        for (Index k = 0; k < n; ++k) {
            t.rows(k, 0) = static_cast<double>(k * stride);
            t.rows.block(k, 1, 1, d) = prior.to_physical(ch.samples.row(k * stride).transpose()).transpose();
        }
        out.tables["chain_" + name] = t;
    };
    thinned(chain_exact, "exact");
    thinned(chain_emulated, "emulated");

    const int bins = 30;
    Matrix physical(chain_emulated.samples.rows(), d);
    for (Index k = 0; k < physical.rows(); ++k)
        physical.row(k) = prior.to_physical(chain_emulated.samples.row(k).transpose()).transpose();
    const Matrix hist = pairwise_histogram(physical, 0, 1, bins, prior.lower, prior.upper);
    Table h;
    h.columns = indexed("bin", bins);
    h.rows = hist;
    out.tables["histogram_0_1_emulated"] = h;
    std::vector<std::array<double, 6>> trace;
    append_trace(trace, 0, trained);
    out.tables["eki_trace"] = trace_table(trace);
    return out;
}

// --- linear Gaussian EKI check ----------------------------------------------

ExperimentResult run_linear_gaussian(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Matrix A(2, 2);
    A << 1.0, 0.5, -0.3, 2.0;
    const Vector prior_mean = Vector::Zero(2);
    const Vector prior_std = Vector::Ones(2);
    const Vector u_true = (Vector(2) << 0.7, -0.4).finished();
    const Matrix gamma = 0.1 * Matrix::Identity(2, 2);

    Rng data_rng = make_stream(c.seed, {stream_tag::data});
    const Vector z = A * u_true + std::sqrt(0.1) * standard_normal(data_rng, 2);
    const Matrix prior_cov = prior_std.cwiseAbs2().asDiagonal();
    const Matrix post_prec = A.transpose() * gamma.inverse() * A + prior_cov.inverse();
    const Vector map = post_prec.ldlt().solve(A.transpose() * gamma.inverse() * z + prior_cov.inverse() * prior_mean);

    const ObservationSpec obs(z, gamma);
    const ForwardMap forward = [A](const Vector& u, Rng&) { return Vector(A * u); };
    Matrix per_repeat(c.repeats, 4);
    for (int r = 0; r < c.repeats; ++r) {
        const std::uint64_t seed = mix_seed(c.seed, {kRepeatTag, static_cast<std::uint64_t>(r)});
        Rng rng = make_stream(seed, {stream_tag::prior});
        const Ensemble init = init_ensemble(prior_mean, prior_std, c.ensemble_size, rng);
        EKISettings s;
        s.scheduler = Scheduler::constant;
        s.timestep = 1.0 / c.iterations;
        s.max_iterations = c.iterations;
        s.terminal_time = 1.0;
        s.inflation_std = 0.0;
        s.seed = seed;
        s.workers = c.workers;
        const EKIResult res = run(forward, init, obs, s);
        const Vector mean = res.ensemble.mean();
        per_repeat.row(r) << r, mean.transpose(), (mean - map).norm() / map.norm();
    }
    int within = 0;
    for (Index r = 0; r < per_repeat.rows(); ++r) within += per_repeat(r, 3) <= 0.05;

    ExperimentResult out;
    out.metrics["map"] = to_std(map);
    out.metrics["mean_relative_error"] = per_repeat.col(3).mean();
    out.metrics["max_relative_error"] = per_repeat.col(3).maxCoeff();
    out.metrics["repeats_within_5pct"] = within;
    out.metrics["seconds"] = seconds_since(t0);
    Table t;
    t.columns = {"repeat", "mean_1", "mean_2", "relative_error"};
    t.rows = per_repeat;
    out.tables["repeats"] = t;
    return out;
}

}  // namespace

EmulatorOptions emulator_options(const ExperimentConfig& c, int d, int p, std::uint64_t seed) {
    EmulatorOptions o;
    o.spec = c.spec(d, p);
    o.tune_features = c.tune_features;
    o.predict_features = c.predict_features;
    o.ensemble_size = c.ensemble_size;
    o.eki.max_iterations = c.iterations;
    o.validation_fraction = c.validation_fraction;
    o.n_cv = c.n_cv;
    o.gamma_samples = c.gamma_samples;
    o.output_feature_variability = c.output_feature_variability;
    o.prior_widths.positive_span = c.positive_span;
    o.prior_widths.matrix_span = c.matrix_span;
    o.tune = c.tune;
    o.seed = seed;
    o.workers = c.workers;
    return o;
}


// --- config -----------------------------------------------------------------

std::string to_string(ExperimentTag tag) {
    switch (tag) {
        case ExperimentTag::ishigami: return "ishigami";
        case ExperimentTag::sobol_g: return "sobol_g";
        case ExperimentTag::lorenz63: return "lorenz63";
        case ExperimentTag::ces_synthetic: return "ces_synthetic";
        case ExperimentTag::linear_gaussian_check: return "linear_gaussian_check";
    }
    return "unknown";
}

ExperimentTag experiment_from_string(const std::string& name) {
    for (auto t : {ExperimentTag::ishigami, ExperimentTag::sobol_g, ExperimentTag::lorenz63, ExperimentTag::ces_synthetic,
                   ExperimentTag::linear_gaussian_check})
        if (to_string(t) == name) return t;
    throw InvalidArgument("unknown experiment '" + name + "'");
}

HyperparamSpec ExperimentConfig::spec(int d, int p) const {
    if (kind == "nonseparable") return HyperparamSpec::nonseparable(d, p, rank);
    if (kind == "separable") return HyperparamSpec::separable(d, p, rank_in, rank_out);
    throw InvalidArgument("unknown hyperparameter kind '" + kind + "'");
}

void ExperimentConfig::validate() const {
    auto positive = [](bool ok, const char* what) {
        if (!ok) throw InvalidArgument(std::string("config: ") + what + " must be positive");
    };
    positive(rank > 0 && rank_in > 0 && rank_out > 0, "ranks");
    positive(tune_features > 0 && predict_features > 0, "feature counts");
    positive(ensemble_size > 1, "ensemble_size (>1)");
    positive(iterations >= 0, "iterations");
    positive(validation_fraction > 0.0 && validation_fraction < 1.0, "validation_fraction (<1)");
    positive(n_cv > 0 && n_train > 0 && repeats > 0 && gamma_samples > 1, "counts");
    positive(noise_variance > 0.0, "noise_variance");
    positive(positive_span > 1.0 && matrix_span > 0.0, "prior spans");
    positive(dimension > 0 && n_base > 0, "dimension and n_base");
    positive(dt > 0.0 && train_time > 0.0 && eval_time > 0.0 && spinup >= 0.0 && spinup < eval_time, "time windows");
    positive(output_dim > 0 && observation_noise_std > 0.0 && map_gain > 0.0 && calibration_ensemble > 1 && calibration_iterations > 0,
             "ces settings");
    positive(chain_length > burn_in && burn_in >= 0, "chain_length beyond burn_in");
    positive(workers > 0, "workers");
    if (kind != "nonseparable" && kind != "separable") throw InvalidArgument("config: kind must be nonseparable or separable");
    if (experiment == ExperimentTag::sobol_g && dimension > sobol_max_dimension() / 2)
        throw InvalidArgument("config: dimension exceeds the supported Sobol design size");
}

ExperimentConfig default_config(ExperimentTag tag) {
    ExperimentConfig c;
    c.experiment = tag;
    switch (tag) {
        case ExperimentTag::ishigami:
            break;
        case ExperimentTag::sobol_g:
            c.dimension = 3;
            c.rank = 3;
            c.tune_features = 300;
            c.predict_features = 1000;
            c.ensemble_size = 200;
            c.n_train = 250 * c.dimension;
            c.n_base = 2000 * c.dimension / (c.dimension + 2);
            c.repeats = 30;
            break;
        case ExperimentTag::lorenz63:
            c.rank = 4;
            c.tune_features = 200;
            c.predict_features = 600;
            c.ensemble_size = 42;
            c.n_train = 500;
            c.noise_variance = 1e-4;
            c.repeats = 1;
            break;
        case ExperimentTag::ces_synthetic:
            c.rank = 1;
            c.tune_features = 200;
            c.predict_features = 1000;
            c.ensemble_size = 60;
            c.n_train = 400;
            c.map_gain = 1.0;
            c.noise_variance = 0.01;
            c.repeats = 1;
            break;
        case ExperimentTag::linear_gaussian_check:
            c.ensemble_size = 1000;
            c.iterations = 10;
            c.repeats = 20;
            break;
    }
    return c;
}

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw InvalidArgument("config: expected a JSON object");
    if (!doc.contains("experiment")) throw InvalidArgument("config: missing 'experiment'");
    ExperimentConfig c = default_config(experiment_from_string(doc.at("experiment").get<std::string>()));
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "experiment") continue;
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "kind") c.kind = v.get<std::string>();
            else if (key == "rank") c.rank = v.get<int>();
            else if (key == "rank_in") c.rank_in = v.get<int>();
            else if (key == "rank_out") c.rank_out = v.get<int>();
            else if (key == "tune_features") c.tune_features = v.get<int>();
            else if (key == "predict_features") c.predict_features = v.get<int>();
            else if (key == "ensemble_size") c.ensemble_size = v.get<int>();
            else if (key == "iterations") c.iterations = v.get<int>();
            else if (key == "validation_fraction") c.validation_fraction = v.get<double>();
            else if (key == "n_cv") c.n_cv = v.get<int>();
            else if (key == "n_train") c.n_train = v.get<int>();
            else if (key == "noise_variance") c.noise_variance = v.get<double>();
            else if (key == "repeats") c.repeats = v.get<int>();
            else if (key == "gamma_samples") c.gamma_samples = v.get<int>();
            else if (key == "positive_span") c.positive_span = v.get<double>();
            else if (key == "matrix_span") c.matrix_span = v.get<double>();
            else if (key == "output_feature_variability") c.output_feature_variability = v.get<bool>();
            else if (key == "tune") c.tune = v.get<bool>();
            else if (key == "dimension") c.dimension = v.get<int>();
            else if (key == "n_base") c.n_base = v.get<int>();
            else if (key == "dt") c.dt = v.get<double>();
            else if (key == "train_time") c.train_time = v.get<double>();
            else if (key == "eval_time") c.eval_time = v.get<double>();
            else if (key == "spinup") c.spinup = v.get<double>();
            else if (key == "bound") c.bound = v.get<double>();
            else if (key == "output_dim") c.output_dim = v.get<int>();
            else if (key == "observation_noise_std") c.observation_noise_std = v.get<double>();
            else if (key == "chain_length") c.chain_length = v.get<int>();
            else if (key == "burn_in") c.burn_in = v.get<int>();
            else if (key == "map_gain") c.map_gain = v.get<double>();
            else if (key == "calibration_ensemble") c.calibration_ensemble = v.get<int>();
            else if (key == "calibration_iterations") c.calibration_iterations = v.get<int>();
            else if (key == "pointwise_covariance") c.pointwise_covariance = v.get<bool>();
            else if (key == "output_dir") c.output_dir = v.get<std::string>();
            else if (key == "workers") c.workers = v.get<int>();
            else throw InvalidArgument("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    // A dimension override for the G-function rescales the dimension-dependent defaults
    // unless they were given explicitly.
    if (c.experiment == ExperimentTag::sobol_g && doc.contains("dimension")) {
        if (!doc.contains("rank")) c.rank = std::min(10, c.dimension);
        if (!doc.contains("n_train")) c.n_train = 250 * c.dimension;
        if (!doc.contains("n_base")) c.n_base = 2000 * c.dimension / (c.dimension + 2);
    }
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    return json{{"experiment", to_string(c.experiment)},
                {"seed", c.seed},
                {"kind", c.kind},
                {"rank", c.rank},
                {"rank_in", c.rank_in},
                {"rank_out", c.rank_out},
                {"tune_features", c.tune_features},
                {"predict_features", c.predict_features},
                {"ensemble_size", c.ensemble_size},
                {"iterations", c.iterations},
                {"validation_fraction", c.validation_fraction},
                {"n_cv", c.n_cv},
                {"n_train", c.n_train},
                {"noise_variance", c.noise_variance},
                {"repeats", c.repeats},
                {"gamma_samples", c.gamma_samples},
                {"positive_span", c.positive_span},
                {"matrix_span", c.matrix_span},
                {"output_feature_variability", c.output_feature_variability},
                {"tune", c.tune},
                {"dimension", c.dimension},
                {"n_base", c.n_base},
                {"dt", c.dt},
                {"train_time", c.train_time},
                {"eval_time", c.eval_time},
                {"spinup", c.spinup},
                {"bound", c.bound},
                {"output_dim", c.output_dim},
                {"observation_noise_std", c.observation_noise_std},
                {"chain_length", c.chain_length},
                {"burn_in", c.burn_in},
                {"map_gain", c.map_gain},
                {"calibration_ensemble", c.calibration_ensemble},
                {"calibration_iterations", c.calibration_iterations},
                {"pointwise_covariance", c.pointwise_covariance},
                {"output_dir", c.output_dir.string()},
                {"workers", c.workers}};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    switch (config.experiment) {
        case ExperimentTag::ishigami:
        case ExperimentTag::sobol_g: return run_gsa(config);
        case ExperimentTag::lorenz63: return run_lorenz(config);
        case ExperimentTag::ces_synthetic: return run_ces(config);
        case ExperimentTag::linear_gaussian_check: return run_linear_gaussian(config);
    }
    throw InvalidArgument("unknown experiment");
}

void emit_results(const ExperimentResult& result, const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoFailure("cannot create output directory " + out_dir.string() + ": " + ec.message());

    // Timings differ between runs; keep them out of results.json so it is reproducible.
    json metrics = result.metrics;
    json timing = json::object();
    if (metrics.is_object() && metrics.contains("seconds")) {
        timing["seconds"] = metrics["seconds"];
        metrics.erase("seconds");
    }
    write_text(out_dir / "results.json", metrics.dump(2) + "\n");

    json files = json::array({"results.json"});
    for (const auto& [name, table] : result.tables) {
        const std::string file = name + ".csv";
        write_csv(out_dir / file, table.columns, table.rows);
        files.push_back(file);
    }
    const auto now = std::chrono::system_clock::now();
    json manifest{{"library", "rftune"},
                  {"version", kVersion},
                  {"config", config_to_json(config)},
                  {"files", files},
                  {"timing", timing},
                  {"written_at_unix", std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()}};
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace rftune::tools

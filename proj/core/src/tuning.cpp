#include "rftune/tuning.hpp"

#include "rftune/parallel.hpp"
#include "rftune/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rftune {

Matrix DataTransform::inputs(const Matrix& raw) const {
    return ((raw.rowwise() - input_mean.transpose()).array().rowwise() / input_scale.transpose().array()).matrix();
}

Vector DataTransform::input(const Vector& raw) const { return (raw - input_mean).cwiseQuotient(input_scale); }

Matrix DataTransform::outputs(const Matrix& raw) const {
    return (raw.rowwise() - output_mean.transpose()) * output_whiten.transpose();
}

Matrix DataTransform::unwhiten_outputs(const Matrix& whitened) const {
    return (whitened * output_unwhiten.transpose()).rowwise() + output_mean.transpose();
}

Vector DataTransform::unwhiten_output(const Vector& whitened) const {
    return output_unwhiten * whitened + output_mean;
}

Matrix DataTransform::covariance(const Matrix& raw) const {
    return output_whiten * raw * output_whiten.transpose();
}

Matrix DataTransform::unwhiten_covariance(const Matrix& whitened) const {
    return output_unwhiten * whitened * output_unwhiten.transpose();
}

DataTransform DataTransform::identity(int d, int p) {
    DataTransform t;
    t.input_mean = Vector::Zero(d);
    t.input_scale = Vector::Ones(d);
    t.output_mean = Vector::Zero(p);
    t.output_whiten = Matrix::Identity(p, p);
    t.output_unwhiten = Matrix::Identity(p, p);
    return t;
}

WhitenedData whiten_data(const Matrix& inputs, const Matrix& outputs, const Matrix& noise) {
    const Index n = inputs.rows();
    if (n < 2) throw InvalidArgument("whiten_data: need at least two points");
    if (outputs.rows() != n) throw DimensionMismatch("whiten_data: inputs and outputs differ in length");
    if (noise.rows() != outputs.cols() || noise.cols() != outputs.cols())
        throw DimensionMismatch("whiten_data: noise must be p x p");
    DataTransform t;
    t.input_mean = inputs.colwise().mean();
    const Matrix centered = inputs.rowwise() - t.input_mean.transpose();
    t.input_scale = (centered.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
    for (Index i = 0; i < t.input_scale.size(); ++i)
        if (!(t.input_scale[i] > 0.0)) throw DegenerateData("input coordinate " + std::to_string(i) + " is constant");

    const ShrunkCovariance shrunk = ledoit_wolf(outputs);
    t.output_mean = shrunk.mean;
    t.output_whiten = inverse_sqrt_spd(shrunk.covariance);
    t.output_unwhiten = sqrt_spd(shrunk.covariance);

    WhitenedData w;
    w.inputs = t.inputs(inputs);
    w.outputs = t.outputs(outputs);
    w.noise = t.covariance(noise);
    w.noise = 0.5 * (w.noise + w.noise.transpose());
    w.transform = std::move(t);
    return w;
}

std::vector<Index> PartitionScheme::training(int j) const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(n_points - group_size()));
    for (std::size_t k = 0; k < groups.size(); ++k)
        if (static_cast<int>(k) != j) out.insert(out.end(), groups[k].begin(), groups[k].end());
    std::sort(out.begin(), out.end());
    return out;
}

PartitionScheme make_partitions(Index n_points, int groups, int n_cv, Rng& rng) {
    if (groups < 1 || n_points < groups || n_points % groups != 0)
        throw InvalidPartition("partition: group count must divide the number of points");
    if (n_cv < 1 || n_cv > groups) throw InvalidPartition("partition: n_cv must lie in [1, groups]");
    if (groups == 1 && n_points > 0) {
        // A single group leaves nothing to train on.
        throw InvalidPartition("partition: need at least two groups");
    }
    std::vector<Index> order(static_cast<std::size_t>(n_points));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    PartitionScheme s;
    s.n_points = n_points;
    s.n_cv = n_cv;
    const Index size = n_points / groups;
    for (int g = 0; g < groups; ++g) {
        std::vector<Index> group(order.begin() + g * size, order.begin() + (g + 1) * size);
        std::sort(group.begin(), group.end());
        s.groups.push_back(std::move(group));
    }
    return s;
}

int groups_for_fraction(Index n_points, double validation_fraction) {
    if (!(validation_fraction > 0.0) || validation_fraction > 0.5)
        throw InvalidPartition("validation fraction must lie in (0, 0.5]");
    const int groups = static_cast<int>(std::lround(1.0 / validation_fraction));
    if (n_points % groups != 0)
        throw InvalidPartition("validation fraction " + std::to_string(validation_fraction) +
                               " does not split " + std::to_string(n_points) + " points evenly");
    return groups;
}

Index TuningProblem::observable_dim() const {
    return static_cast<Index>(partitions.n_cv) * (partitions.group_size() * spec.output_dim + 2);
}

void TuningProblem::validate() const {
    spec.validate();
    if (features < 1) throw InvalidArgument("tuning: feature count must be positive");
    if (inputs.rows() != outputs.rows() || inputs.cols() != spec.input_dim || outputs.cols() != spec.output_dim)
        throw DimensionMismatch("tuning: data do not match the hyperparameter spec");
    if (noise.dim() != spec.output_dim) throw DimensionMismatch("tuning: noise must be p x p");
    if (partitions.n_points != inputs.rows()) throw InvalidPartition("tuning: partition does not cover the data");
}

namespace {

Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

}  // namespace

Vector forward_map(const Vector& u, const TuningProblem& problem, Rng& rng) {
    if (!u.allFinite()) throw ForwardMapFailure("forward map: non-finite hyperparameters");
    const FeatureDistribution dist = constrain(u, problem.spec);
    const int p = problem.spec.output_dim;
    const Index block = problem.partitions.group_size() * p + 2;
    Vector out(problem.observable_dim());
    FeatureSet shared;
    if (problem.share_features) shared = sample_features(dist, problem.features, rng);
    const double sqrt_m = std::sqrt(static_cast<double>(problem.features));
    for (int j = 0; j < problem.partitions.n_cv; ++j) {
        const FeatureSet fs = problem.share_features ? shared : sample_features(dist, problem.features, rng);
        const auto train = problem.partitions.training(j);
        const auto& valid = problem.partitions.validation(j);
        try {
            const RFFit f = fit(fs, select_rows(problem.inputs, train), select_rows(problem.outputs, train), problem.noise);
            const Matrix pred = predict_mean(f, select_rows(problem.inputs, valid));
            out.segment(j * block, block - 2) = stack_rows(pred);
            out[j * block + block - 2] = f.beta.norm() / sqrt_m;
            out[j * block + block - 1] = std::sqrt(std::max(0.0, f.system_log_det()));
        } catch (const FactorizationFailure& e) {
            throw ForwardMapFailure(std::string("forward map: ") + e.what());
        }
    }
    return out;
}

Vector assemble_observable(const TuningProblem& problem) {
    const int p = problem.spec.output_dim;
    const Index block = problem.partitions.group_size() * p + 2;
    Vector z = Vector::Zero(problem.observable_dim());
    for (int j = 0; j < problem.partitions.n_cv; ++j)
        z.segment(j * block, block - 2) = stack_rows(select_rows(problem.outputs, problem.partitions.validation(j)));
    return z;
}

GammaEstimate estimate_gamma(const TuningProblem& problem, const Vector& u_ref, int n_samples, std::uint64_t seed,
                             int workers) {
    if (n_samples < 2) throw InvalidArgument("estimate_gamma: need at least two samples");
    problem.validate();
    Matrix samples(n_samples, problem.observable_dim());
    parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t k) {
        Rng rng = make_stream(seed, {stream_tag::gamma, k});
        samples.row(static_cast<Index>(k)) = forward_map(u_ref, problem, rng).transpose();
    });
    const ShrunkCovariance shrunk = ledoit_wolf(samples);
    GammaEstimate g;
    g.feature_covariance = shrunk.covariance;
    g.intensity = shrunk.intensity;
    g.gamma = shrunk.covariance;
    const int p = problem.spec.output_dim;
    const Index block = problem.partitions.group_size() * p + 2;
    if (!problem.output_feature_variability) {
        for (int j = 0; j < problem.partitions.n_cv; ++j) {
            g.gamma.middleRows(j * block, block - 2).setZero();
            g.gamma.middleCols(j * block, block - 2).setZero();
        }
    }
    for (int j = 0; j < problem.partitions.n_cv; ++j) {
        const Index base = j * block;
        for (Index n = 0; n < problem.partitions.group_size(); ++n)
            g.gamma.block(base + n * p, base + n * p, p, p) += problem.noise.covariance();
        g.gamma(base + block - 2, base + block - 2) += 1.0;
        g.gamma(base + block - 1, base + block - 1) += 1.0;
    }
    return g;
}

TuningResult tune(const TuningProblem& problem, const PriorSpec& prior, int ensemble_size,
                  const EKISettings& settings, const GammaEstimate& gamma) {
    problem.validate();
    check_prior(prior, problem.spec);
    TuningResult result;
    result.gamma = gamma;
    const ObservationSpec obs(assemble_observable(problem), gamma.gamma);
    Rng init = make_stream(settings.seed, {stream_tag::prior});
    const Ensemble initial = init_ensemble(prior, ensemble_size, init);
    const ForwardMap g = [&problem](const Vector& u, Rng& rng) { return forward_map(u, problem, rng); };
    result.eki = run(g, initial, obs, settings);
    result.u = result.eki.ensemble.mean();
    result.distribution = constrain(result.u, problem.spec);
    return result;
}

TuningResult tune(const TuningProblem& problem, const PriorSpec& prior, int ensemble_size,
                  const EKISettings& settings, int gamma_samples) {
    const GammaEstimate gamma = estimate_gamma(problem, prior.mean(), gamma_samples, settings.seed, settings.workers);
    return tune(problem, prior, ensemble_size, settings, gamma);
}

double eb_objective(const Vector& u, const TuningProblem& problem, Rng& rng) {
    const FeatureDistribution dist = constrain(u, problem.spec);
    const FeatureSet fs = sample_features(dist, problem.features, rng);
    const RFFit f = fit(fs, problem.inputs, problem.outputs, problem.noise);
    const double m = static_cast<double>(problem.features);
    const Matrix mean = predict_mean(f, problem.inputs);
    Matrix residual = stack_rows(problem.outputs - mean);
    problem.noise.whiten_stacked(residual);
    return f.beta.squaredNorm() / m + residual.squaredNorm() + f.system_log_det();
}

}  // namespace rftune

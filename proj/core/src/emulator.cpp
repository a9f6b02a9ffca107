#include "rftune/emulator.hpp"

namespace rftune {

RFEmulator::RFEmulator(DataTransform transform, FeatureDistribution distribution, RFFit fit)
    : transform_(std::move(transform)), distribution_(std::move(distribution)), fit_(std::move(fit)) {}

Vector RFEmulator::predict_mean(const Vector& x) const {
    return transform_.unwhiten_output(rftune::predict_mean(fit_, transform_.input(x)));
}

Matrix RFEmulator::predict_mean(const Matrix& inputs) const {
    return transform_.unwhiten_outputs(rftune::predict_mean(fit_, transform_.inputs(inputs)));
}

Matrix RFEmulator::predict_cov(const Vector& x) const {
    const Vector xw = transform_.input(x);
    return transform_.unwhiten_covariance(rftune::predict_cov(fit_, xw, xw));
}

RFEmulator refit_emulator(const FeatureDistribution& distribution, const WhitenedData& data, int features, Rng& rng) {
    const FeatureSet fs = sample_features(distribution, features, rng);
    RFFit f = fit(fs, data.inputs, data.outputs, NoiseModel(data.noise));
    return RFEmulator(data.transform, distribution, std::move(f));
}

TrainedEmulator train_emulator(const Matrix& inputs, const Matrix& outputs, const Matrix& noise,
                               const EmulatorOptions& options) {
    options.spec.validate();
    TrainedEmulator out;
    out.data = whiten_data(inputs, outputs, noise);
    const PriorSpec prior = default_prior(options.spec, options.prior_widths);
    FeatureDistribution dist = constrain(prior.mean(), options.spec);
    if (options.tune && options.eki.max_iterations > 0) {
        TuningProblem problem;
        problem.inputs = out.data.inputs;
        problem.outputs = out.data.outputs;
        problem.noise = NoiseModel(out.data.noise);
        problem.spec = options.spec;
        problem.features = options.tune_features;
        problem.output_feature_variability = options.output_feature_variability;
        Rng part = make_stream(options.seed, {stream_tag::partition});
        problem.partitions = make_partitions(inputs.rows(), groups_for_fraction(inputs.rows(), options.validation_fraction),
                                             options.n_cv, part);
        EKISettings settings = options.eki;
        settings.seed = mix_seed(options.seed, {stream_tag::forward});
        settings.workers = options.workers;
        out.tuning = tune(problem, prior, options.ensemble_size, settings, options.gamma_samples);
        dist = out.tuning->distribution;
    }
    Rng rng = make_stream(options.seed, {stream_tag::features});
    out.emulator = refit_emulator(dist, out.data, options.predict_features, rng);
    return out;
}

}  // namespace rftune

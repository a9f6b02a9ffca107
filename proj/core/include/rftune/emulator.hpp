#pragma once

// End-to-end emulator: whiten raw data, tune the feature distribution with EKI,
// then refit with a (usually larger) prediction feature count. Predictions are
// returned in raw units.

#include "rftune/common.hpp"
#include "rftune/eki.hpp"
#include "rftune/hyperparams.hpp"
#include "rftune/rfr.hpp"
#include "rftune/tuning.hpp"

#include <cstdint>
#include <optional>

namespace rftune {

struct EmulatorOptions {
    HyperparamSpec spec;
    int tune_features = 150;
    int predict_features = 500;
    int ensemble_size = 30;
    EKISettings eki;
    double validation_fraction = 0.2;
    int n_cv = 2;
    int gamma_samples = 100;
    /// See TuningProblem::output_feature_variability.
    bool output_feature_variability = false;
    PriorWidths prior_widths;
    /// When false, skip EKI and use the prior-mean hyperparameters.
    bool tune = true;
    std::uint64_t seed = 0;
    int workers = 1;
};

class RFEmulator {
public:
    RFEmulator() = default;
    RFEmulator(DataTransform transform, FeatureDistribution distribution, RFFit fit);

    int input_dim() const { return fit_.input_dim(); }
    int output_dim() const { return fit_.output_dim(); }

    Vector predict_mean(const Vector& x) const;
    /// N x p means for N raw inputs.
    Matrix predict_mean(const Matrix& inputs) const;
    /// Predictive covariance in raw output units (excludes observation noise).
    Matrix predict_cov(const Vector& x) const;

    const DataTransform& transform() const { return transform_; }
    const FeatureDistribution& distribution() const { return distribution_; }
    const RFFit& fit() const { return fit_; }

private:
    DataTransform transform_;
    FeatureDistribution distribution_;
    RFFit fit_;
};

struct TrainedEmulator {
    RFEmulator emulator;
    WhitenedData data;
    std::optional<TuningResult> tuning;
};

/// Draws `features` features from `distribution` and fits them to whitened data.
RFEmulator refit_emulator(const FeatureDistribution& distribution, const WhitenedData& data, int features, Rng& rng);

TrainedEmulator train_emulator(const Matrix& inputs, const Matrix& outputs, const Matrix& noise,
                               const EmulatorOptions& options);

}  // namespace rftune

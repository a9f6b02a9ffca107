#pragma once

// The hyperparameter-learning inverse problem: whitened data, cross-validation
// partitions, the stochastic forward map, its observable and noise covariance,
// and the EKI driver that returns a tuned feature distribution.
//
// For each stacked partition the forward map emits
//   [ predicted means at the validation inputs ; ||beta|| / sqrt(M) ; sqrt(log det(G + I)) ]
// and the observable is [ validation outputs ; 0 ; 0 ].

#include "rftune/common.hpp"
#include "rftune/eki.hpp"
#include "rftune/feature_models.hpp"
#include "rftune/hyperparams.hpp"
#include "rftune/random.hpp"
#include "rftune/rfr.hpp"

#include <cstdint>
#include <vector>

namespace rftune {

/// Affine maps into whitened coordinates: x_w = (x - input_mean) / input_scale and
/// y_w = output_whiten (y - output_mean).
struct DataTransform {
    Vector input_mean;
    Vector input_scale;
    Vector output_mean;
    Matrix output_whiten;
    Matrix output_unwhiten;

    Matrix inputs(const Matrix& raw) const;
    Vector input(const Vector& raw) const;
    Matrix outputs(const Matrix& raw) const;
    Matrix unwhiten_outputs(const Matrix& whitened) const;
    Vector unwhiten_output(const Vector& whitened) const;
    /// W C W^T for a raw output covariance.
    Matrix covariance(const Matrix& raw) const;
    /// W^{-1} C W^{-T} for a whitened output covariance.
    Matrix unwhiten_covariance(const Matrix& whitened) const;

    static DataTransform identity(int d, int p);
};

struct WhitenedData {
    Matrix inputs;
    Matrix outputs;
    Matrix noise;
    DataTransform transform;
};

/// Inputs to zero mean and unit (population) variance per coordinate; outputs centered
/// and multiplied by the inverse square root of their Ledoit-Wolf shrunk covariance.
WhitenedData whiten_data(const Matrix& inputs, const Matrix& outputs, const Matrix& noise);

struct PartitionScheme {
    Index n_points = 0;
    std::vector<std::vector<Index>> groups;
    int n_cv = 1;

    Index group_count() const { return static_cast<Index>(groups.size()); }
    Index group_size() const { return groups.empty() ? 0 : static_cast<Index>(groups.front().size()); }
    const std::vector<Index>& validation(int j) const { return groups.at(static_cast<std::size_t>(j)); }
    std::vector<Index> training(int j) const;
};

/// Random disjoint groups of size N / groups; the first n_cv serve as validation sets.
PartitionScheme make_partitions(Index n_points, int groups, int n_cv, Rng& rng);

/// Group count for a validation fraction, e.g. 0.2 -> 5 groups.
int groups_for_fraction(Index n_points, double validation_fraction);

struct TuningProblem {
    Matrix inputs;
    Matrix outputs;
    NoiseModel noise;
    HyperparamSpec spec;
    int features = 100;
    PartitionScheme partitions;
    /// Draw one feature set per forward-map call and reuse it for every partition.
    bool share_features = true;
    /// Keep the feature-draw variability on the validation-output rows of Gamma. Off by
    /// default: those rows then carry the observation noise only, and feature variability
    /// enters through the two regularizer rows.
    bool output_feature_variability = false;

    Index observable_dim() const;
    void validate() const;
};

Vector forward_map(const Vector& u, const TuningProblem& problem, Rng& rng);
Vector assemble_observable(const TuningProblem& problem);

struct GammaEstimate {
    Matrix gamma;
    /// Shrunk Monte Carlo covariance of the forward map alone.
    Matrix feature_covariance;
    double intensity = 0.0;
};

/// Gamma = LedoitWolf(Cov[G(u_ref)]) + blockdiag(B_Sigma on validation points, I_2) per partition,
/// with the output rows of the shrunk covariance dropped unless output_feature_variability is set.
GammaEstimate estimate_gamma(const TuningProblem& problem, const Vector& u_ref, int n_samples, std::uint64_t seed,
                             int workers = 1);

struct TuningResult {
    FeatureDistribution distribution;
    Vector u;
    EKIResult eki;
    GammaEstimate gamma;
};

/// Runs EKI from the prior and returns constrain(ensemble mean).
TuningResult tune(const TuningProblem& problem, const PriorSpec& prior, int ensemble_size,
                  const EKISettings& settings, const GammaEstimate& gamma);
TuningResult tune(const TuningProblem& problem, const PriorSpec& prior, int ensemble_size,
                  const EKISettings& settings, int gamma_samples = 100);

/// ||beta||^2 / M + ||B^{-1/2} (Y - mean)||^2 + log det(G + I) on the full data set.
double eb_objective(const Vector& u, const TuningProblem& problem, Rng& rng);

}  // namespace rftune

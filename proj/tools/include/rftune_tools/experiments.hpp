#pragma once

// Config-driven experiment pipelines behind the command line tool. Each run is
// deterministic given the seed and independent of the worker count.

#include "rftune/common.hpp"
#include "rftune/emulator.hpp"
#include "rftune/hyperparams.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rftune::tools {

enum class ExperimentTag { ishigami, sobol_g, lorenz63, ces_synthetic, linear_gaussian_check };

std::string to_string(ExperimentTag tag);
ExperimentTag experiment_from_string(const std::string& name);

struct ExperimentConfig {
    ExperimentTag experiment = ExperimentTag::ishigami;
    std::uint64_t seed = 0;
    std::string kind = "nonseparable";
    int rank = 3;
    int rank_in = 1;
    int rank_out = 1;
    int tune_features = 150;
    int predict_features = 500;
    int ensemble_size = 30;
    int iterations = 20;
    double validation_fraction = 0.2;
    int n_cv = 2;
    /// Number of training points (Lorenz: training pairs; CES: prior draws added to the calibration iterates).
    int n_train = 300;
    double noise_variance = 0.01;
    int repeats = 20;
    int gamma_samples = 100;
    double positive_span = 1e3;
    double matrix_span = 3.0;
    bool output_feature_variability = false;
    bool tune = true;

    // gsa
    int dimension = 3;
    int n_base = 3200;

    // lorenz63
    double dt = 0.01;
    double train_time = 20.0;
    double eval_time = 1000.0;
    double spinup = 10.0;
    double bound = 100.0;

    // ces_synthetic
    int output_dim = 6;
    double observation_noise_std = 0.1;
    /// Input gain of the synthetic map; larger values make the inverse problem better posed.
    double map_gain = 1.0;
    /// Calibration EKI on the true map; its iterates form the emulator training set.
    int calibration_ensemble = 40;
    int calibration_iterations = 4;
    int chain_length = 100000;
    int burn_in = 10000;
    bool pointwise_covariance = true;

    std::filesystem::path output_dir = "rftune_out";
    int workers = 1;

    HyperparamSpec spec(int d, int p) const;
    void validate() const;
};

/// Recommended defaults for one experiment.
ExperimentConfig default_config(ExperimentTag tag);

/// Defaults for the tag named in the document, overridden by its other keys. Unknown
/// keys and invalid values raise InvalidArgument.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// A named table written as CSV with a fixed column order.
struct Table {
    std::vector<std::string> columns;
    Matrix rows;
};

struct ExperimentResult {
    nlohmann::json metrics = nlohmann::json::object();
    std::map<std::string, Table> tables;
};

/// Emulator settings for a d -> p problem under this config.
EmulatorOptions emulator_options(const ExperimentConfig& config, int d, int p, std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes results.json, one CSV per table and manifest.json into out_dir.
void emit_results(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& out_dir);

}  // namespace rftune::tools

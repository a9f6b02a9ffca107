#pragma once

// Emulator-accelerated Bayesian inversion: random-walk Metropolis on an emulated
// negative log-posterior, with an acceptance-rate step-size tuner and a synthetic
// forward map for end-to-end runs.

#include "rftune/common.hpp"
#include "rftune/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rftune {

/// theta = lower + (upper - lower) * sigmoid(phi) with phi ~ N(mean, stddev^2) per coordinate.
/// Chains run on phi, where the prior is Gaussian.
struct BoundedPrior {
    std::vector<std::string> names;
    Vector lower;
    Vector upper;
    Vector mean;
    Vector stddev;

    Index dim() const { return lower.size(); }
    /// Gaussian mean chosen so that the physical image of the mean equals `centers`.
    static BoundedPrior from_centers(std::vector<std::string> names, Vector lower, Vector upper, const Vector& centers,
                                     double stddev = 1.0);
    Vector to_physical(const Vector& phi) const;
    Vector to_unconstrained(const Vector& theta) const;
    double neg_log_density(const Vector& phi) const;
    Vector sample(Rng& rng) const;
    void validate() const;
};

/// Five bounded physical parameters with unit-variance logit-normal priors.
BoundedPrior default_physical_prior();

using NegLogDensity = std::function<double(const Vector&)>;

struct EmulatedPosterior {
    /// Emulated (or exact) forward map G(phi).
    std::function<Vector(const Vector&)> mean;
    /// Pointwise covariance Gamma(phi); when empty, `noise` is used everywhere.
    std::function<Matrix(const Vector&)> covariance;
    Matrix noise;
    Vector observation;
    NegLogDensity neg_log_prior;
};

/// 0.5 ||Gamma^{-1/2}(y - G)||^2 + 0.5 log det Gamma - log P; +inf outside the prior support
/// or when Gamma is not positive definite.
double emulated_neg_log_posterior(const Vector& phi, const EmulatedPosterior& posterior);

struct ChainState {
    Vector theta;
    double value = 0.0;
};

/// One Gaussian random-walk proposal theta + step * xi, accepted with probability min(1, exp(L - L')).
ChainState rwm_step(const ChainState& state, const NegLogDensity& target, double step, Rng& rng, bool* accepted = nullptr);

struct StepTunerOptions {
    double target = 0.25;
    double tolerance = 0.05;
    double initial_step = 1.0;
    Index pilot_steps = 2000;
    int max_rounds = 30;
};

struct StepTuning {
    double step = 0.0;
    double acceptance = 0.0;
    int rounds = 0;
    ChainState state;
    std::vector<double> tried_steps;
};

/// Doubles or halves the step on pilot chains (bisecting once bracketed) until the
/// acceptance rate lies in target +- tolerance. Throws NonConvergence otherwise.
StepTuning tune_step_size(const NegLogDensity& target, const Vector& start, Rng& rng, const StepTunerOptions& options = {});

struct MCMCChain {
    Matrix samples;  // retained samples, one per row
    Vector values;
    Index accepted = 0;
    Index proposed = 0;
    double step = 0.0;

    double acceptance_rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
    Vector mean() const;
    Matrix covariance() const;
};

/// Runs n_steps proposals from `start` and keeps the states after the first burn_in.
MCMCChain run_chain(const NegLogDensity& target, const Vector& start, double step, Index n_steps, Index burn_in, Rng& rng);

/// theta -> A tanh(B theta) + c with fixed seeded A (p x h), B (h x d), c (p).
struct SyntheticMap {
    Matrix A;
    Matrix B;
    Vector c;

    Vector operator()(const Vector& theta) const;
    int input_dim() const { return static_cast<int>(B.cols()); }
    int output_dim() const { return static_cast<int>(A.rows()); }
};

SyntheticMap make_synthetic_map(int input_dim, int output_dim, std::uint64_t seed, double input_gain = 3.0);

/// Counts of samples (i, j) on a bins x bins grid over [lo_i, hi_i] x [lo_j, hi_j].
Matrix pairwise_histogram(const Matrix& samples, Index i, Index j, int bins, const Vector& lo, const Vector& hi);

}  // namespace rftune

#pragma once

// Ensemble Kalman inversion with perturbed observations, additive inflation and
// an adaptive timestep. Members are columns of a q x J matrix.

#include "rftune/common.hpp"
#include "rftune/hyperparams.hpp"
#include "rftune/random.hpp"

#include <Eigen/Cholesky>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rftune {

struct Ensemble {
    Matrix members;  // q x J
    double time = 0.0;
    int iteration = 0;

    Index size() const { return members.cols(); }
    Index dim() const { return members.rows(); }
    Vector mean() const { return members.rowwise().mean(); }
};

struct ObservationSpec {
    Vector target;
    Matrix noise;

    ObservationSpec() = default;
    ObservationSpec(Vector target, Matrix noise);

    Index dim() const { return target.size(); }
    const Matrix& factor() const { return factor_; }
    /// 0.5 || Gamma^{-1/2} (target - g) ||^2 for each column of g.
    Vector half_misfits(const Matrix& evaluations) const;

private:
    Matrix factor_;
};

enum class Scheduler { constant, adaptive };

struct EKISettings {
    int max_iterations = 20;
    double terminal_time = 1.0;
    Scheduler scheduler = Scheduler::adaptive;
    /// Step used by the constant scheduler.
    double timestep = 0.1;
    double inflation_std = 1e-2;
    std::uint64_t seed = 0;
    int workers = 1;
    /// Attempts to replace a member whose forward evaluation failed.
    int max_resamples = 20;
    /// Record every iterate and its evaluations.
    bool keep_history = false;

    void validate() const;
};

/// Forward map G(u). The generator is the member's private substream for this call.
using ForwardMap = std::function<Vector(const Vector& u, Rng& rng)>;

Ensemble init_ensemble(const Vector& mean, const Vector& stddev, Index size, Rng& rng);
Ensemble init_ensemble(const PriorSpec& prior, Index size, Rng& rng);

struct EnsembleCovariances {
    Matrix cross;       // C^{uG}, q x n
    Matrix evaluation;  // C^{GG}, n x n
};

/// Empirical covariances with 1/J normalization.
EnsembleCovariances empirical_covariances(const Matrix& members, const Matrix& evaluations);

/// One Kalman move of every member with perturbed observations drawn from N(0, Gamma / dt),
/// followed by N(0, inflation_std^2 I) additive noise. Member j draws only from member_rngs[j].
Ensemble update_step(const Ensemble& ensemble, const Matrix& evaluations, const ObservationSpec& obs, double dt,
                     std::span<Rng> member_rngs, double inflation_std = 0.0);

/// Misfit-controlled step, clipped to [1e-6, T - t].
double adaptive_timestep(const Ensemble& ensemble, const ObservationSpec& obs, const Matrix& evaluations,
                         double terminal_time = 1.0);

struct EKIRecord {
    int iteration = 0;
    double time = 0.0;
    double timestep = 0.0;
    /// Mean over members of (1/n) || Gamma^{-1/2} (z - G(u_j)) ||^2.
    double misfit = 0.0;
    double min_norm = 0.0;
    double max_norm = 0.0;
    int resampled = 0;
};

struct EKIResult {
    Ensemble ensemble;
    std::vector<EKIRecord> trace;
    std::vector<Matrix> member_history;
    std::vector<Matrix> evaluation_history;
};

/// Evaluates every member, replacing failures by draws from the ensemble's empirical Gaussian.
/// Substreams are keyed by (seed, iteration, member, attempt). Returns the resample count.
int evaluate_ensemble(Ensemble& ensemble, const ForwardMap& forward, std::uint64_t seed, int workers,
                      int max_resamples, Matrix& evaluations);

EKIResult run(const ForwardMap& forward, const Ensemble& initial, const ObservationSpec& obs,
              const EKISettings& settings);

/// Trace rows as CSV: iteration, time, timestep, misfit, min_norm, max_norm, resampled.
void write_trace_csv(const std::string& path, const std::vector<EKIRecord>& trace);

}  // namespace rftune

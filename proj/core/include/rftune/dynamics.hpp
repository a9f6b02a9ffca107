#pragma once

// Lorenz 63 data generation and evaluation of emulators used as one-step integrators.

#include "rftune/common.hpp"
#include "rftune/random.hpp"

#include <array>
#include <functional>
#include <string>

namespace rftune {

struct LorenzParameters {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

/// States on a uniform grid t0, t0 + dt, ...; row k is the state at t0 + k dt.
struct Trajectory {
    Matrix states;
    double dt = 0.01;
    double t0 = 0.0;

    Index size() const { return states.rows(); }
    double time(Index k) const { return t0 + dt * static_cast<double>(k); }
    /// Sub-trajectory starting at row `first`.
    Trajectory tail(Index first) const;
};

Vector lorenz_vector_field(const Vector& state, const LorenzParameters& params = {});

/// One explicit Euler step of the Lorenz system.
Vector euler_step(const Vector& state, double dt, const LorenzParameters& params = {});

/// Explicit Euler; throws BlowUp with the step index on a non-finite state.
Trajectory euler_integrate(const Vector& initial, double dt, Index n_steps, const LorenzParameters& params = {});

enum class PairSampling { random, sequential };

struct TrainingPairs {
    Matrix inputs;
    Matrix outputs;
};

/// Pairs (s_n, s_{n+1} + eta), eta ~ N(0, noise). Random sampling draws start indices without replacement.
TrainingPairs make_training_pairs(const Trajectory& trajectory, Index n_pairs, const Matrix& noise, Rng& rng,
                                  PairSampling sampling = PairSampling::random);

using StepMap = std::function<Vector(const Vector&)>;

/// Iterates `step` from `initial`; throws BlowUp on a non-finite state or one whose sup
/// norm exceeds `bound` (when bound > 0).
Trajectory emulator_rollout(const StepMap& step, const Vector& initial, Index n_steps, double dt = 0.01,
                            double bound = 0.0);

/// Per-coordinate two-sample Kolmogorov-Smirnov distance of the marginal distributions.
Vector marginal_cdf_distance(const Trajectory& a, const Trajectory& b);

/// Time until |rollout - truth| first exceeds `threshold` in some coordinate.
double valid_time(const Trajectory& rollout, const Trajectory& truth, double threshold = 10.0);

/// Columns t, x, y, z.
void write_trajectory_csv(const std::string& path, const Trajectory& trajectory, Index stride = 1);

/// Empirical CDF of each coordinate on a shared grid: columns value, cdf_x, cdf_y, cdf_z.
Matrix marginal_cdf_table(const Trajectory& trajectory, const Vector& grid);

}  // namespace rftune

#pragma once

// Dense Gaussian process regression, used as the exact reference for random
// feature regression and as a small-data comparison emulator. Cost is
// O((N p)^3), so fits are capped.

#include "rftune/common.hpp"
#include "rftune/feature_models.hpp"
#include "rftune/rfr.hpp"

#include <Eigen/Cholesky>

#include <variant>
#include <vector>

namespace rftune {

/// k(x, x') = variance * exp(-0.5 sum_i ((x_i - x'_i) / l_i)^2), times I_p for vector outputs.
struct RbfArd {
    Vector lengthscales;
    double variance = 1.0;
};

struct Kernel {
    std::variant<RbfArd, FeatureSet> form;
    /// Output dimension (taken from the feature set for finite-rank kernels).
    int output_dim = 1;
    double nugget = 0.0;

    static Kernel rbf(Vector lengthscales, double variance, int output_dim = 1, double nugget = 0.0);
    static Kernel finite_rank(FeatureSet features, double nugget = 0.0);

    int input_dim() const;
    void validate() const;
    /// K(x, x'), p x p.
    Matrix block(const Vector& x, const Vector& x_prime) const;
    /// K(X, X'), (N p) x (N' p) in stacked ordering.
    Matrix dense(const Matrix& inputs, const Matrix& inputs_prime) const;
};

inline constexpr Index kDefaultGpCap = 2000;

struct GPFit {
    Kernel kernel;
    Matrix inputs;
    Vector alpha;
    Eigen::LLT<Matrix> factor;
    Vector prior_mean;
};

struct GPPrediction {
    Vector mean;
    Matrix covariance;
};

/// Solves (K(X,X) + B_Sigma + nugget I) alpha = Y - prior_mean.
GPFit gp_fit(const Kernel& kernel, const Matrix& inputs, const Matrix& outputs, const NoiseModel& noise,
             const Vector& prior_mean = Vector(), Index cap = kDefaultGpCap);

GPPrediction gp_predict(const GPFit& fit, const Vector& x);
/// Means at each input, N x p.
Matrix gp_predict_mean(const GPFit& fit, const Matrix& inputs);

/// r^T (K + B_Sigma)^{-1} r + log det(K + B_Sigma), with r = Y - prior_mean.
double neg_log_marginal_likelihood(const Kernel& kernel, const Matrix& inputs, const Matrix& outputs,
                                   const NoiseModel& noise, const Vector& prior_mean = Vector(),
                                   Index cap = kDefaultGpCap);

/// Grid member with the smallest negative log marginal likelihood; the first one wins ties.
Kernel gp_tune_grid(const Matrix& inputs, const Matrix& outputs, const NoiseModel& noise,
                    const std::vector<Kernel>& grid, Index cap = kDefaultGpCap);

}  // namespace rftune

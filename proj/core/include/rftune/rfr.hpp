#pragma once

// Vector-valued random feature regression.
//
// Data are N inputs (rows of an N x d matrix) and N outputs (rows of an N x p
// matrix). Stacked output vectors use row n*p + i for coordinate i of point n,
// matching evaluate_features. The block-diagonal noise B_Sigma = I_N (x) Sigma is
// never formed.

#include "rftune/common.hpp"
#include "rftune/feature_models.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace rftune {

class NoiseModel {
public:
    NoiseModel() = default;
    explicit NoiseModel(Matrix covariance);
    static NoiseModel isotropic(int p, double variance);

    int dim() const { return static_cast<int>(covariance_.rows()); }
    const Matrix& covariance() const { return covariance_; }
    /// Lower Cholesky factor L with Sigma = L L^T.
    const Matrix& factor() const { return factor_; }
    double log_det() const { return log_det_; }

    /// Applies L^{-1} in place to every p-block of a stacked (N p) x k matrix.
    void whiten_stacked(Matrix& stacked) const;

private:
    Matrix covariance_;
    Matrix factor_;
    double log_det_ = 0.0;
};

struct FitOptions {
    /// Added to the diagonal of the M x M system before factorizing.
    double jitter = 0.0;
};

struct RFFit {
    FeatureSet features;
    Vector beta;
    /// (1/M) Phi^T B_Sigma^{-1} Phi + I_M, and its Cholesky factor.
    Matrix system;
    Eigen::LLT<Matrix> factor;
    /// Constant prior mean in R^p (zero by default).
    Vector prior_mean;
    NoiseModel noise;
    Index n_train = 0;
    double jitter = 0.0;

    int output_dim() const { return features.output_dim; }
    int input_dim() const { return features.input_dim; }
    /// log det of the factored system matrix.
    double system_log_det() const;
};

/// Fits beta from ((1/M) Phi^T B^{-1} Phi + I) beta = Phi^T B^{-1} (Y - prior_mean).
/// `prior_mean` may be empty (zero) or a length-p constant.
RFFit fit(const FeatureSet& features, const Matrix& inputs, const Matrix& outputs, const NoiseModel& noise,
          const Vector& prior_mean = Vector(), const FitOptions& options = {});

/// Rebuilds the factor of an RFFit whose `system` matrix has been set directly (deserialization).
void refactor(RFFit& fit);

Vector predict_mean(const RFFit& fit, const Vector& x);
/// N x p, row n is the mean at input n.
Matrix predict_mean(const RFFit& fit, const Matrix& inputs);

/// Posterior covariance between x and x', p x p.
Matrix predict_cov(const RFFit& fit, const Vector& x, const Vector& x_prime);
/// Posterior covariance at each input, batched over points.
std::vector<Matrix> predict_cov(const RFFit& fit, const Matrix& inputs);

/// G_M = (1/M) sum_n Phi_n^T Sigma^{-1} Phi_n, M x M.
Matrix gram_matrix(const FeatureSet& features, const Matrix& inputs, const NoiseModel& noise);

/// log det(G + I) via Cholesky.
double logdet_term(const Matrix& gram);

/// Flattens an N x p output matrix into the stacked (N p) vector.
Vector stack_rows(const Matrix& outputs);
/// Inverse of stack_rows.
Matrix unstack_rows(const Vector& stacked, int p);

}  // namespace rftune

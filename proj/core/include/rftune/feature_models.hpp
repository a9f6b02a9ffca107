#pragma once

// Random Fourier features with a low-rank-perturbed Gaussian frequency law.
//
// A feature is phi(x; Xi, b) = sqrt(scale) * cos(Xi x + b) in R^p with Xi a p x d
// frequency matrix and b a phase vector in [0, 2pi]^p. The frequencies follow
//   nonseparable: vec(Xi) ~ N(0, A A^T),           A = I_dp + U diag(S) U^T
//   separable:    Xi^T = A_in Z A_out^T,  Z iid N(0,1) (d x p),
//                 A_in = I_d + V_in diag(T_in) V_in^T, A_out = I_p + V_out diag(T_out) V_out^T
// vec() is column-major throughout.

#include "rftune/common.hpp"
#include "rftune/random.hpp"

namespace rftune {

enum class FeatureKind { nonseparable, separable };

struct FeatureDistribution {
    FeatureKind kind = FeatureKind::nonseparable;
    int input_dim = 1;
    int output_dim = 1;
    double scale = 1.0;
    // nonseparable
    Matrix U;  // dp x r
    Vector S;  // r, positive
    // separable
    Matrix V_in;   // d x r_in
    Vector T_in;   // r_in, positive
    Matrix V_out;  // p x r_out
    Vector T_out;  // r_out, positive

    void validate() const;
};

/// A = I + U diag(S) U^T, applied matrix-free so the dp x dp covariance is never formed.
class LowRankFactor {
public:
    LowRankFactor() = default;
    LowRankFactor(Matrix basis, Vector weights);

    Index dim() const { return basis_.rows(); }
    /// Returns A * z for each column of z.
    Matrix apply(const Matrix& z) const;
    Matrix dense() const;
    /// A A^T, formed densely. Only for small dimensions.
    Matrix covariance() const;

private:
    Matrix basis_;
    Vector weights_;
};

struct CovarianceFactor {
    FeatureKind kind = FeatureKind::nonseparable;
    LowRankFactor joint;   // nonseparable: dp x dp
    LowRankFactor input;   // separable: d x d
    LowRankFactor output;  // separable: p x p

    /// Covariance of vec(Xi) (column-major, p x d reshaping). Kronecker C_in (x) C_out when separable.
    Matrix dense_covariance() const;
};

CovarianceFactor build_covariance_factor(const FeatureDistribution& dist);

/// M sampled features. Feature m occupies columns [m*p, (m+1)*p) of `frequencies`,
/// which hold Xi_m^T (d x p); the matching phases are phases[m*p .. m*p+p).
struct FeatureSet {
    double scale = 1.0;
    int input_dim = 1;
    int output_dim = 1;
    Matrix frequencies;  // d x (M p)
    Vector phases;       // M p

    int count() const { return output_dim == 0 ? 0 : static_cast<int>(phases.size() / output_dim); }
    /// Xi_m as a p x d matrix.
    Matrix frequency(int m) const;
    Vector phase(int m) const;
    void validate() const;
};

FeatureSet sample_features(const FeatureDistribution& dist, int num_features, Rng& rng);

/// Phi_M(X): (N p) x M, row n*p + i holds output coordinate i of input n.
Matrix evaluate_features(const FeatureSet& features, const Matrix& inputs);

/// Phi_M(x): p x M.
Matrix evaluate_features_at(const FeatureSet& features, const Vector& x);

/// K_M(x, x') = (1/M) sum_m phi(x; theta_m) phi(x'; theta_m)^T, a p x p matrix.
Matrix approximate_kernel(const FeatureSet& features, const Vector& x, const Vector& x_prime);

/// Dense K_M(X, X'), (N p) x (N' p), built directly from the feature outer products.
Matrix approximate_kernel_matrix(const FeatureSet& features, const Matrix& inputs, const Matrix& inputs_prime);

}  // namespace rftune

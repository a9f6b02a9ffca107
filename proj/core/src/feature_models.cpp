#include "rftune/feature_models.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rftune {

void FeatureDistribution::validate() const {
    if (input_dim < 1 || output_dim < 1) throw InvalidArgument("feature distribution: dimensions must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw NonpositiveParameter("feature distribution: scale must be positive");
    const Index dp = static_cast<Index>(input_dim) * output_dim;
    auto positive = [](const Vector& v) { return v.size() == 0 || (v.array() > 0.0).all(); };
    if (kind == FeatureKind::nonseparable) {
        if (U.rows() != dp || U.cols() != S.size())
            throw DimensionMismatch("feature distribution: U must be dp x r with r = |S|");
        if (!positive(S)) throw NonpositiveParameter("feature distribution: S must be positive");
    } else {
        if (V_in.rows() != input_dim || V_in.cols() != T_in.size())
            throw DimensionMismatch("feature distribution: V_in must be d x r_in");
        if (V_out.rows() != output_dim || V_out.cols() != T_out.size())
            throw DimensionMismatch("feature distribution: V_out must be p x r_out");
        if (!positive(T_in) || !positive(T_out))
            throw NonpositiveParameter("feature distribution: T_in and T_out must be positive");
    }
}

LowRankFactor::LowRankFactor(Matrix basis, Vector weights) : basis_(std::move(basis)), weights_(std::move(weights)) {
    if (basis_.cols() != weights_.size()) throw DimensionMismatch("low-rank factor: basis/weights mismatch");
}

Matrix LowRankFactor::apply(const Matrix& z) const {
    if (z.rows() != basis_.rows()) throw DimensionMismatch("low-rank factor: operand has wrong row count");
    if (basis_.cols() == 0) return z;
    Matrix projected = basis_.transpose() * z;
    projected = weights_.asDiagonal() * projected;
    return z + basis_ * projected;
}

Matrix LowRankFactor::dense() const {
    return Matrix::Identity(basis_.rows(), basis_.rows()) + basis_ * weights_.asDiagonal() * basis_.transpose();
}

Matrix LowRankFactor::covariance() const {
    const Matrix a = dense();
    return a * a.transpose();
}

Matrix CovarianceFactor::dense_covariance() const {
    if (kind == FeatureKind::nonseparable) return joint.covariance();
    const Matrix cin = input.covariance();
    const Matrix cout = output.covariance();
    // vec(Xi) column-major for p x d Xi: Cov = C_in (x) C_out.
    Matrix c(cin.rows() * cout.rows(), cin.cols() * cout.cols());
    for (Index i = 0; i < cin.rows(); ++i)
        for (Index j = 0; j < cin.cols(); ++j)
            c.block(i * cout.rows(), j * cout.cols(), cout.rows(), cout.cols()) = cin(i, j) * cout;
    return c;
}

CovarianceFactor build_covariance_factor(const FeatureDistribution& dist) {
    dist.validate();
    CovarianceFactor f;
    f.kind = dist.kind;
    if (dist.kind == FeatureKind::nonseparable) {
        f.joint = LowRankFactor(dist.U, dist.S);
    } else {
        f.input = LowRankFactor(dist.V_in, dist.T_in);
        f.output = LowRankFactor(dist.V_out, dist.T_out);
    }
    return f;
}

Matrix FeatureSet::frequency(int m) const {
    return frequencies.middleCols(static_cast<Index>(m) * output_dim, output_dim).transpose();
}

Vector FeatureSet::phase(int m) const { return phases.segment(static_cast<Index>(m) * output_dim, output_dim); }

void FeatureSet::validate() const {
    if (input_dim < 1 || output_dim < 1) throw InvalidArgument("feature set: dimensions must be positive");
    if (frequencies.rows() != input_dim || frequencies.cols() != phases.size() || phases.size() % output_dim != 0)
        throw DimensionMismatch("feature set: frequency/phase arrays are inconsistent");
    if (count() < 1) throw InvalidArgument("feature set: need at least one feature");
    if (!(scale > 0.0)) throw NonpositiveParameter("feature set: scale must be positive");
}

FeatureSet sample_features(const FeatureDistribution& dist, int num_features, Rng& rng) {
    if (num_features < 1) throw InvalidArgument("sample_features: need at least one feature");
    const CovarianceFactor factor = build_covariance_factor(dist);
    const Index d = dist.input_dim;
    const Index p = dist.output_dim;
    const Index m_count = num_features;

    FeatureSet fs;
    fs.scale = dist.scale;
    fs.input_dim = dist.input_dim;
    fs.output_dim = dist.output_dim;
    fs.frequencies.resize(d, m_count * p);

    if (dist.kind == FeatureKind::nonseparable) {
        const Matrix z = standard_normal(rng, d * p, m_count);
        const Matrix x = factor.joint.apply(z);
        for (Index m = 0; m < m_count; ++m) {
            // column-major vec of the p x d frequency: entry (i, j) sits at i + p j
            for (Index j = 0; j < d; ++j)
                for (Index i = 0; i < p; ++i) fs.frequencies(j, m * p + i) = x(i + p * j, m);
        }
    } else {
        for (Index m = 0; m < m_count; ++m) {
            const Matrix z = standard_normal(rng, d, p);
            const Matrix left = factor.input.apply(z);                                  // A_in Z
            const Matrix xi_t = factor.output.apply(left.transpose()).transpose();      // A_in Z A_out^T
            fs.frequencies.middleCols(m * p, p) = xi_t;
        }
    }

    fs.phases.resize(m_count * p);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
    for (Index k = 0; k < fs.phases.size(); ++k) fs.phases[k] = unif(rng);
    return fs;
}

Matrix evaluate_features(const FeatureSet& features, const Matrix& inputs) {
    if (inputs.cols() != features.input_dim)
        throw DimensionMismatch("evaluate_features: inputs have " + std::to_string(inputs.cols()) +
                                " columns, expected " + std::to_string(features.input_dim));
    const Index n = inputs.rows();
    const Index p = features.output_dim;
    const Index m_count = features.count();
    const double amp = std::sqrt(features.scale);
    const Matrix arg = inputs * features.frequencies;  // N x (M p)
    Matrix phi(n * p, m_count);
    for (Index m = 0; m < m_count; ++m)
        for (Index k = 0; k < n; ++k)
            for (Index i = 0; i < p; ++i) phi(k * p + i, m) = amp * std::cos(arg(k, m * p + i) + features.phases[m * p + i]);
    return phi;
}

Matrix evaluate_features_at(const FeatureSet& features, const Vector& x) {
    return evaluate_features(features, x.transpose());
}

Matrix approximate_kernel(const FeatureSet& features, const Vector& x, const Vector& x_prime) {
    const Matrix a = evaluate_features_at(features, x);
    const Matrix b = evaluate_features_at(features, x_prime);
    return a * b.transpose() / static_cast<double>(features.count());
}

Matrix approximate_kernel_matrix(const FeatureSet& features, const Matrix& inputs, const Matrix& inputs_prime) {
    const Index p = features.output_dim;
    Matrix k(inputs.rows() * p, inputs_prime.rows() * p);
    for (Index a = 0; a < inputs.rows(); ++a)
        for (Index b = 0; b < inputs_prime.rows(); ++b)
            k.block(a * p, b * p, p, p) =
                approximate_kernel(features, inputs.row(a).transpose(), inputs_prime.row(b).transpose());
    return k;
}

}  // namespace rftune

#include "rftune/feature_models.hpp"
#include "rftune/hyperparams.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace rftune;

namespace {

FeatureDistribution nonseparable(int d, int p, Matrix U, Vector S, double scale = 1.0) {
    FeatureDistribution dist;
    dist.kind = FeatureKind::nonseparable;
    dist.input_dim = d;
    dist.output_dim = p;
    dist.scale = scale;
    dist.U = std::move(U);
    dist.S = std::move(S);
    return dist;
}

FeatureSet single_feature(double xi, double phase, double scale) {
    FeatureSet fs;
    fs.scale = scale;
    fs.input_dim = 1;
    fs.output_dim = 1;
    fs.frequencies = Matrix::Constant(1, 1, xi);
    fs.phases = Vector::Constant(1, phase);
    return fs;
}

// vec(Xi) covariance from samples, using the documented column-major reshape.
Matrix sample_covariance(const FeatureSet& fs) {
    const int p = fs.output_dim, d = fs.input_dim, m = fs.count();
    Matrix v(d * p, m);
    for (int k = 0; k < m; ++k) {
        const Matrix xi = fs.frequency(k);
        v.col(k) = Eigen::Map<const Vector>(xi.data(), d * p);
    }
    return v * v.transpose() / m;
}

}  // namespace

TEST(CovarianceFactor, ZeroBasisIsIdentity) {
    const auto dist = nonseparable(2, 2, Matrix::Zero(4, 2), Vector::Ones(2));
    EXPECT_TRUE(build_covariance_factor(dist).dense_covariance().isIdentity(1e-15));
}

TEST(CovarianceFactor, RankOneHandExpansion) {
    // (I + e1 e1^T)^2 = diag(4, 1, 1)
    Matrix U = Matrix::Zero(3, 1);
    U(0, 0) = 1.0;
    const auto dist = nonseparable(3, 1, U, Vector::Ones(1));
    Vector expected = Vector::Ones(3);
    expected[0] = 4.0;
    EXPECT_TRUE(build_covariance_factor(dist).dense_covariance().isApprox(Matrix(expected.asDiagonal()), 1e-15));
}

TEST(CovarianceFactor, DenseMatchesFactorProduct) {
    Rng rng = make_stream(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + trial % 4, p = 1 + trial % 5, r = 1 + trial % (d * p);
        const Matrix U = standard_normal(rng, d * p, r);
        const Vector S = standard_normal(rng, r).array().exp();
        const Matrix A = Matrix::Identity(d * p, d * p) + U * S.asDiagonal() * U.transpose();
        const Matrix C = build_covariance_factor(nonseparable(d, p, U, S)).dense_covariance();
        EXPECT_LT((C - A * A.transpose()).cwiseAbs().maxCoeff(), 1e-10 * (1 + A.squaredNorm()));
        EXPECT_LT((C - C.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(CovarianceFactor, SeparableIsKronecker) {
    Rng rng = make_stream(22);
    FeatureDistribution dist;
    dist.kind = FeatureKind::separable;
    dist.input_dim = 3;
    dist.output_dim = 2;
    dist.V_in = standard_normal(rng, 3, 2);
    dist.T_in = Vector::Constant(2, 0.7);
    dist.V_out = standard_normal(rng, 2, 1);
    dist.T_out = Vector::Constant(1, 1.3);
    const Matrix Ain = Matrix::Identity(3, 3) + dist.V_in * dist.T_in.asDiagonal() * dist.V_in.transpose();
    const Matrix Aout = Matrix::Identity(2, 2) + dist.V_out * dist.T_out.asDiagonal() * dist.V_out.transpose();
    const Matrix Cin = Ain * Ain.transpose(), Cout = Aout * Aout.transpose();
    Matrix kron(6, 6);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) kron.block(2 * i, 2 * j, 2, 2) = Cin(i, j) * Cout;
    EXPECT_TRUE(build_covariance_factor(dist).dense_covariance().isApprox(kron, 1e-12));
}

TEST(LowRankFactor, ApplyMatchesDense) {
    Rng rng = make_stream(23);
    const LowRankFactor f(standard_normal(rng, 7, 3), Vector::Constant(3, 0.4));
    const Matrix z = standard_normal(rng, 7, 5);
    EXPECT_TRUE(f.apply(z).isApprox(f.dense() * z, 1e-13));
}

TEST(SampleFeatures, MomentsMatchCovariance) {
    Rng rng = make_stream(24);
    Matrix U(4, 1);
    U << 0.5, -0.2, 0.3, 0.1;
    const auto dist = nonseparable(2, 2, U, Vector::Constant(1, 2.0));
    const FeatureSet fs = sample_features(dist, 100000, rng);
    const Matrix C = build_covariance_factor(dist).dense_covariance();

    Vector mean = Vector::Zero(4);
    for (int k = 0; k < fs.count(); ++k) {
        const Matrix xi = fs.frequency(k);
        mean += Eigen::Map<const Vector>(xi.data(), 4);
    }
    mean /= fs.count();
    const Vector se = (C.diagonal() / fs.count()).cwiseSqrt();
    EXPECT_TRUE((mean.cwiseAbs().array() < 4.0 * se.array()).all());
    EXPECT_LT((sample_covariance(fs) - C).norm() / C.norm(), 0.05);
    EXPECT_GE(fs.phases.minCoeff(), 0.0);
    EXPECT_LE(fs.phases.maxCoeff(), 2.0 * std::numbers::pi);
}

TEST(SampleFeatures, SeparableMomentsMatchKronecker) {
    Rng rng = make_stream(25);
    FeatureDistribution dist;
    dist.kind = FeatureKind::separable;
    dist.input_dim = 2;
    dist.output_dim = 2;
    dist.V_in = Matrix::Constant(2, 1, 0.6);
    dist.T_in = Vector::Ones(1);
    dist.V_out = Matrix::Identity(2, 1);
    dist.T_out = Vector::Constant(1, 0.5);
    const FeatureSet fs = sample_features(dist, 100000, rng);
    const Matrix C = build_covariance_factor(dist).dense_covariance();
    EXPECT_LT((sample_covariance(fs) - C).norm() / C.norm(), 0.05);
}

TEST(SampleFeatures, RejectsZeroCount) {
    Rng rng = make_stream(1);
    EXPECT_THROW(sample_features(nonseparable(1, 1, Matrix::Zero(1, 1), Vector::Ones(1)), 0, rng), InvalidArgument);
}

TEST(EvaluateFeatures, ZeroFrequencyIsOnes) {
    FeatureSet fs;
    fs.scale = 1.0;
    fs.input_dim = 2;
    fs.output_dim = 3;
    fs.frequencies = Matrix::Zero(2, 4 * 3);
    fs.phases = Vector::Zero(4 * 3);
    Rng rng = make_stream(2);
    const Matrix phi = evaluate_features(fs, standard_normal(rng, 5, 2));
    EXPECT_EQ(phi.rows(), 15);
    EXPECT_EQ(phi.cols(), 4);
    EXPECT_TRUE(phi.isOnes(0.0));
}

TEST(EvaluateFeatures, HandValue) {
    const FeatureSet fs = single_feature(std::numbers::pi, 0.0, 4.0);
    EXPECT_NEAR(evaluate_features(fs, Matrix::Constant(1, 1, 1.0))(0, 0), -2.0, 1e-14);
}

TEST(EvaluateFeatures, BoundedByRootScale) {
    Rng rng = make_stream(26);
    const auto dist = nonseparable(3, 2, standard_normal(rng, 6, 2), Vector::Ones(2), 2.5);
    const FeatureSet fs = sample_features(dist, 50, rng);
    const Matrix phi = evaluate_features(fs, standard_normal(rng, 20, 3));
    EXPECT_LE(phi.cwiseAbs().maxCoeff(), std::sqrt(2.5) + 1e-15);
}

TEST(EvaluateFeatures, StackedRowsMatchPointwise) {
    Rng rng = make_stream(27);
    const auto dist = nonseparable(2, 3, standard_normal(rng, 6, 1), Vector::Ones(1), 1.5);
    const FeatureSet fs = sample_features(dist, 7, rng);
    const Matrix X = standard_normal(rng, 4, 2);
    const Matrix phi = evaluate_features(fs, X);
    for (int n = 0; n < 4; ++n) {
        const Matrix at = evaluate_features_at(fs, X.row(n).transpose());
        EXPECT_TRUE(phi.middleRows(3 * n, 3).isApprox(at, 1e-15));
        // independent evaluation of one entry: sqrt(scale) cos(Xi_m x + b_m)
        const Vector arg = fs.frequency(5) * X.row(n).transpose() + fs.phase(5);
        EXPECT_NEAR(at(1, 5), std::sqrt(1.5) * std::cos(arg[1]), 1e-14);
    }
}

TEST(EvaluateFeatures, DimensionMismatch) {
    const FeatureSet fs = single_feature(1.0, 0.0, 1.0);
    EXPECT_THROW(evaluate_features(fs, Matrix::Zero(2, 2)), DimensionMismatch);
}

TEST(ApproximateKernel, SingleZeroFeatureIsOnes) {
    FeatureSet fs;
    fs.scale = 1.0;
    fs.input_dim = 2;
    fs.output_dim = 3;
    fs.frequencies = Matrix::Zero(2, 3);
    fs.phases = Vector::Zero(3);
    const Matrix k = approximate_kernel(fs, Vector::Ones(2), Vector::Zero(2));
    EXPECT_TRUE(k.isOnes(0.0));
}

TEST(ApproximateKernel, ConvergesToRbf) {
    Rng rng = make_stream(28);
    const auto dist = nonseparable(1, 1, Matrix::Zero(1, 1), Vector::Ones(1), 2.0);
    const FeatureSet fs = sample_features(dist, 100000, rng);
    const double k = approximate_kernel(fs, Vector::Constant(1, 0.3), Vector::Constant(1, 1.3))(0, 0);
    EXPECT_NEAR(k, std::exp(-0.5), 0.01);
}

TEST(ApproximateKernel, TraceBoundAndMatrixForm) {
    Rng rng = make_stream(29);
    const auto dist = nonseparable(2, 2, standard_normal(rng, 4, 2), Vector::Ones(2), 1.7);
    const FeatureSet fs = sample_features(dist, 30, rng);
    const Matrix X = standard_normal(rng, 3, 2), Xp = standard_normal(rng, 4, 2);
    for (int n = 0; n < 3; ++n) {
        const Vector x = X.row(n).transpose();
        EXPECT_LE(approximate_kernel(fs, x, x).trace(), 1.7 * 2 + 1e-12);
    }
    const Matrix K = approximate_kernel_matrix(fs, X, Xp);
    ASSERT_EQ(K.rows(), 6);
    ASSERT_EQ(K.cols(), 8);
    const Matrix phi = evaluate_features(fs, X), phip = evaluate_features(fs, Xp);
    EXPECT_TRUE(K.isApprox(phi * phip.transpose() / fs.count(), 1e-12));
    EXPECT_TRUE(K.block(2, 4, 2, 2).isApprox(approximate_kernel(fs, X.row(1).transpose(), Xp.row(2).transpose()), 1e-12));
}

#include "oracles.hpp"

#include "rftune/gpr.hpp"
#include "rftune/rfr.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace rftune;

namespace {

// phi(x) = sqrt(scale) cos(xi x + b) with the constants picked so phi(x1) = 2.
FeatureSet constant_two_feature() {
    FeatureSet fs;
    fs.scale = 4.0;
    fs.input_dim = 1;
    fs.output_dim = 1;
    fs.frequencies = Matrix::Zero(1, 1);
    fs.phases = Vector::Zero(1);
    return fs;
}

}  // namespace

TEST(Fit, HandSolvedSingleFeature) {
    const RFFit f = fit(constant_two_feature(), Matrix::Constant(1, 1, 0.4), Matrix::Constant(1, 1, 3.0),
                        NoiseModel::isotropic(1, 1.0));
    ASSERT_EQ(f.beta.size(), 1);
    EXPECT_NEAR(f.beta[0], 6.0 / 5.0, 1e-14);
    EXPECT_NEAR(predict_mean(f, Vector(Vector::Constant(1, 0.4)))[0], 12.0 / 5.0, 1e-14);
}

TEST(Fit, DataAtPriorMeanGivesZeroCoefficients) {
    Rng rng = make_stream(31);
    const oracle::Instance inst = oracle::random_instance(rng, 2, 2, 6, 5);
    Vector mean(2);
    mean << 0.3, -1.1;
    const Matrix Y = Matrix::Ones(6, 1) * mean.transpose();
    const RFFit f = fit(inst.features, inst.X, Y, NoiseModel(inst.noise), mean);
    EXPECT_TRUE(f.beta.isZero(1e-14));
    EXPECT_TRUE(predict_mean(f, Vector(Vector::Constant(2, 5.0))).isApprox(mean, 1e-14));
}

TEST(Fit, MatchesGpWithFeatureKernel) {
    Rng rng = make_stream(32);
    const oracle::Instance inst = oracle::random_instance(rng, 2, 2, 8, 5);
    const RFFit f = fit(inst.features, inst.X, inst.Y, NoiseModel(inst.noise));
    const Matrix Xs = standard_normal(rng, 20, 2);
    const oracle::Posterior post = oracle::gp_posterior(inst, Xs);
    EXPECT_LT((oracle::stack(predict_mean(f, Xs)) - post.mean).cwiseAbs().maxCoeff(), 1e-8);
    const oracle::Posterior at_train = oracle::gp_posterior(inst, inst.X);
    EXPECT_LT((oracle::stack(predict_mean(f, inst.X)) - at_train.mean).cwiseAbs().maxCoeff(), 1e-8);
    for (int n = 0; n < 20; ++n) {
        const Vector x = Xs.row(n).transpose();
        const Vector y = Xs.row((n + 3) % 20).transpose();
        const Matrix cov = predict_cov(f, x, y);
        EXPECT_LT((cov - post.cov.block(2 * n, 2 * ((n + 3) % 20), 2, 2)).cwiseAbs().maxCoeff(), 1e-8);
    }
    const std::vector<Matrix> batched = predict_cov(f, Xs);
    for (int n = 0; n < 20; ++n)
        EXPECT_LT((batched[static_cast<std::size_t>(n)] - post.cov.block(2 * n, 2 * n, 2, 2)).cwiseAbs().maxCoeff(),
                  1e-8);
}

TEST(PredictCov, VanishesAtTrainingPointWithoutNoise) {
    Rng rng = make_stream(33);
    oracle::Instance inst = oracle::random_instance(rng, 1, 1, 3, 40);
    const RFFit f = fit(inst.features, inst.X, inst.Y, NoiseModel::isotropic(1, 1e-10));
    EXPECT_LT(predict_cov(f, inst.X.row(0).transpose(), inst.X.row(0).transpose()).trace(), 1e-6);
}

TEST(PredictCov, ManyFeaturesApproachRbfGp) {
    // scale 2 and unit frequency variance give K_M -> exp(-|x - x'|^2 / 2).
    Rng rng = make_stream(34);
    FeatureDistribution dist;
    dist.input_dim = 1;
    dist.output_dim = 1;
    dist.scale = 2.0;
    dist.U = Matrix::Zero(1, 1);
    dist.S = Vector::Ones(1);
    const FeatureSet fs = sample_features(dist, 3000, rng);
    Matrix X(6, 1);
    X << -2.0, -1.2, -0.1, 0.5, 1.4, 2.2;
    Matrix Y = X.array().sin();
    const double noise = 0.05;
    const RFFit f = fit(fs, X, Y, NoiseModel::isotropic(1, noise));

    Matrix K(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) K(i, j) = oracle::rbf(X.row(i).transpose(), X.row(j).transpose(), 1.0, 1.0);
    K.diagonal().array() += noise;
    const Eigen::LLT<Matrix> llt(K);
    for (double t : {-1.7, -0.6, 0.2, 1.0, 1.9}) {
        Vector ks(6);
        for (int i = 0; i < 6; ++i) ks[i] = oracle::rbf(X.row(i).transpose(), Vector::Constant(1, t), 1.0, 1.0);
        const double var = 1.0 - ks.dot(llt.solve(ks));
        const double got = predict_cov(f, Vector::Constant(1, t), Vector::Constant(1, t))(0, 0);
        EXPECT_NEAR(got, var, 0.05 * var + 2e-3) << "at " << t;
    }
}

TEST(GramMatrix, ZeroFeaturesGiveZero) {
    FeatureSet fs;
    fs.scale = 1.0;
    fs.input_dim = 1;
    fs.output_dim = 1;
    fs.frequencies = Matrix::Zero(1, 3);
    fs.phases = Vector::Constant(3, std::numbers::pi / 2);
    const Matrix G = gram_matrix(fs, Matrix::Constant(4, 1, 0.7), NoiseModel::isotropic(1, 1.0));
    EXPECT_LT(G.cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(logdet_term(G), 0.0, 1e-14);
}

TEST(GramMatrix, MatchesDenseAssembly) {
    Rng rng = make_stream(35);
    for (int trial = 0; trial < 10; ++trial) {
        const oracle::Instance inst = oracle::random_instance(rng, 1 + trial % 3, 1 + trial % 2, 6, 9);
        const Matrix phi = oracle::feature_matrix(inst.features, inst.X);
        const Matrix B = oracle::block_noise(inst.noise, inst.X.rows());
        const Matrix dense = phi.transpose() * B.inverse() * phi / inst.features.count();
        const Matrix G = gram_matrix(inst.features, inst.X, NoiseModel(inst.noise));
        EXPECT_LT((G - dense).cwiseAbs().maxCoeff(), 1e-10);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(LogdetTerm, ScalarValue) {
    EXPECT_NEAR(logdet_term(Matrix::Constant(1, 1, 3.0)), std::log(4.0), 1e-15);
}

TEST(LogdetTerm, DeterminantIdentity) {
    // log det(K_M + B) - N log det Sigma = log det(G + I)
    Rng rng = make_stream(36);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 + trial % 3, p = 1 + (trial / 3) % 3, n = 1 + trial % 6, m = 1 + trial % 8;
        const oracle::Instance inst = oracle::random_instance(rng, d, p, n, m);
        const Matrix K = oracle::kernel(inst.features, inst.X, inst.X) + oracle::block_noise(inst.noise, n);
        const double lhs = std::log(K.determinant()) - n * std::log(inst.noise.determinant());
        const double rhs = logdet_term(gram_matrix(inst.features, inst.X, NoiseModel(inst.noise)));
        EXPECT_NEAR(lhs, rhs, 1e-8);
        EXPECT_GE(rhs, -1e-10);
    }
}

TEST(NoiseModel, RejectsIndefinite) {
    Matrix bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    EXPECT_THROW(NoiseModel{bad}, FactorizationFailure);
    EXPECT_THROW(NoiseModel::isotropic(2, 0.0), NonpositiveParameter);
}

TEST(StackRows, RoundTrip) {
    Rng rng = make_stream(37);
    const Matrix Y = standard_normal(rng, 5, 3);
    const Vector s = stack_rows(Y);
    EXPECT_EQ(s[4], Y(1, 1));
    EXPECT_EQ(unstack_rows(s, 3), Y);
}

TEST(Fit, DimensionChecks) {
    const FeatureSet fs = constant_two_feature();
    EXPECT_THROW(fit(fs, Matrix::Zero(2, 1), Matrix::Zero(3, 1), NoiseModel::isotropic(1, 1.0)), DimensionMismatch);
    EXPECT_THROW(fit(fs, Matrix::Zero(2, 2), Matrix::Zero(2, 1), NoiseModel::isotropic(1, 1.0)), DimensionMismatch);
    EXPECT_THROW(fit(fs, Matrix::Zero(2, 1), Matrix::Zero(2, 1), NoiseModel::isotropic(2, 1.0)), DimensionMismatch);
}

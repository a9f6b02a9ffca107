#include "oracles.hpp"

#include "rftune/gpr.hpp"
#include "rftune/rfr.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rftune;

TEST(GpFit, ZeroDataZeroWeights) {
    Rng rng = make_stream(41);
    const Matrix X = standard_normal(rng, 5, 2);
    const GPFit f = gp_fit(Kernel::rbf(Vector::Ones(2), 1.0), X, Matrix::Zero(5, 1), NoiseModel::isotropic(1, 0.1));
    EXPECT_TRUE(f.alpha.isZero(0.0));
}

TEST(GpFit, HandSolvedScalar) {
    // K(x1, x1) = 1, sigma^2 = 1, y = 2 -> alpha = 2 / 2
    const GPFit f = gp_fit(Kernel::rbf(Vector::Ones(1), 1.0), Matrix::Zero(1, 1), Matrix::Constant(1, 1, 2.0),
                           NoiseModel::isotropic(1, 1.0));
    EXPECT_NEAR(f.alpha[0], 1.0, 1e-15);
}

TEST(GpFit, FiniteRankKernelReproducesRfr) {
    Rng rng = make_stream(42);
    const oracle::Instance inst = oracle::random_instance(rng, 3, 2, 7, 6);
    const GPFit g = gp_fit(Kernel::finite_rank(inst.features), inst.X, inst.Y, NoiseModel(inst.noise));
    const RFFit r = fit(inst.features, inst.X, inst.Y, NoiseModel(inst.noise));
    const Matrix Xs = standard_normal(rng, 10, 3);
    EXPECT_LT((gp_predict_mean(g, Xs) - predict_mean(r, Xs)).cwiseAbs().maxCoeff(), 1e-8);
    for (int n = 0; n < 10; ++n) {
        const Vector x = Xs.row(n).transpose();
        EXPECT_LT((gp_predict(g, x).covariance - predict_cov(r, x, x)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(GpFit, CapExceeded) {
    const Matrix X = Matrix::Zero(11, 1);
    EXPECT_THROW(gp_fit(Kernel::rbf(Vector::Ones(1), 1.0), X, X, NoiseModel::isotropic(1, 1.0), Vector(), 10),
                 CapExceeded);
}

TEST(GpPredict, FarFieldRevertsToPrior) {
    Rng rng = make_stream(43);
    const Matrix X = standard_normal(rng, 8, 2);
    const Matrix Y = standard_normal(rng, 8, 1);
    const Vector mean = Vector::Constant(1, 0.7);
    const GPFit f = gp_fit(Kernel::rbf(Vector::Constant(2, 0.3), 2.0), X, Y, NoiseModel::isotropic(1, 0.01), mean);
    const GPPrediction far = gp_predict(f, Vector::Constant(2, 50.0));
    EXPECT_NEAR(far.mean[0], 0.7, 1e-6);
    EXPECT_NEAR(far.covariance(0, 0), 2.0, 1e-6);
}

TEST(GpPredict, InterpolatesWithoutNoise) {
    Rng rng = make_stream(44);
    const Matrix X = standard_normal(rng, 5, 1);
    const Matrix Y = standard_normal(rng, 5, 1);
    const GPFit f = gp_fit(Kernel::rbf(Vector::Constant(1, 0.5), 1.0), X, Y, NoiseModel::isotropic(1, 1e-12));
    for (int n = 0; n < 5; ++n) {
        const GPPrediction at = gp_predict(f, X.row(n).transpose());
        EXPECT_NEAR(at.mean[0], Y(n, 0), 1e-5);
        EXPECT_LT(at.covariance(0, 0), 1e-6);
    }
}

TEST(GpPredict, MatchesDenseImplementation) {
    Rng rng = make_stream(45);
    const Matrix X = standard_normal(rng, 9, 2);
    const Matrix Y = standard_normal(rng, 9, 1);
    Vector ell(2);
    ell << 0.7, 1.8;
    const double var = 1.3, noise = 0.2;
    auto k = [&](const Vector& a, const Vector& b) {
        return var * std::exp(-0.5 * (a - b).cwiseQuotient(ell).squaredNorm());
    };
    Matrix K(9, 9);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) K(i, j) = k(X.row(i).transpose(), X.row(j).transpose());
    K.diagonal().array() += noise;
    const Matrix Kinv = K.inverse();
    const GPFit f = gp_fit(Kernel::rbf(ell, var), X, Y, NoiseModel::isotropic(1, noise));
    for (int t = 0; t < 5; ++t) {
        const Vector x = standard_normal(rng, 2);
        Vector ks(9);
        for (int i = 0; i < 9; ++i) ks[i] = k(X.row(i).transpose(), x);
        const GPPrediction got = gp_predict(f, x);
        EXPECT_NEAR(got.mean[0], ks.dot(Kinv * Y.col(0)), 1e-10);
        EXPECT_NEAR(got.covariance(0, 0), var - ks.dot(Kinv * ks), 1e-10);
    }
}

TEST(NegLogMarginalLikelihood, ZeroKernel) {
    Rng rng = make_stream(46);
    FeatureSet zero;
    zero.scale = 1.0;
    zero.input_dim = 1;
    zero.output_dim = 1;
    zero.frequencies = Matrix::Zero(1, 1);
    zero.phases = Vector::Constant(1, 1.5707963267948966);
    const Matrix X = standard_normal(rng, 6, 1);
    const Matrix Y = standard_normal(rng, 6, 1);
    EXPECT_NEAR(neg_log_marginal_likelihood(Kernel::finite_rank(zero), X, Y, NoiseModel::isotropic(1, 1.0)),
                Y.squaredNorm(), 1e-12);
}

TEST(NegLogMarginalLikelihood, ScalarValue) {
    const double v = neg_log_marginal_likelihood(Kernel::rbf(Vector::Ones(1), 1.0), Matrix::Zero(1, 1),
                                                 Matrix::Constant(1, 1, 2.0), NoiseModel::isotropic(1, 1.0));
    EXPECT_NEAR(v, 2.0 + std::log(2.0), 1e-12);
    EXPECT_NEAR(v, 2.6931, 1e-4);
}

TEST(NegLogMarginalLikelihood, FiniteRankDecomposition) {
    // r^T (K + B)^{-1} r + log det(K + B)
    //   = ||beta||^2 / M + ||B^{-1/2}(Y - mean)||^2 + log det(G + I) + N log det Sigma
    Rng rng = make_stream(47);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 1 + trial % 3, p = 1 + trial % 2, n = 2 + trial % 5, m = 2 + trial % 7;
        const oracle::Instance inst = oracle::random_instance(rng, d, p, n, m);
        const NoiseModel noise(inst.noise);
        const double nlml = neg_log_marginal_likelihood(Kernel::finite_rank(inst.features), inst.X, inst.Y, noise);
        const RFFit f = fit(inst.features, inst.X, inst.Y, noise);
        Matrix resid = stack_rows(inst.Y - predict_mean(f, inst.X));
        noise.whiten_stacked(resid);
        const double rhs = f.beta.squaredNorm() / m + resid.squaredNorm() +
                           logdet_term(gram_matrix(inst.features, inst.X, noise)) + n * noise.log_det();
        EXPECT_NEAR(nlml, rhs, 1e-8 * std::max(1.0, std::abs(nlml)));
    }
}

TEST(GpTuneGrid, SingleMember) {
    Rng rng = make_stream(48);
    const Matrix X = standard_normal(rng, 5, 1), Y = standard_normal(rng, 5, 1);
    const Kernel k = gp_tune_grid(X, Y, NoiseModel::isotropic(1, 0.1), {Kernel::rbf(Vector::Constant(1, 0.3), 2.0)});
    EXPECT_DOUBLE_EQ(std::get<RbfArd>(k.form).lengthscales[0], 0.3);
}

TEST(GpTuneGrid, RecoversGeneratingLengthscale) {
    const std::vector<double> ells = {0.1, 0.5, 2.5};
    std::vector<Kernel> grid;
    for (double l : ells) grid.push_back(Kernel::rbf(Vector::Constant(1, l), 1.0));
    const double noise = 1e-2;
    int hits = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng = make_stream(4800 + trial);
        Matrix X(64, 1);
        for (int i = 0; i < 64; ++i) X(i, 0) = uniform(rng, 0.0, 5.0);
        Matrix K(64, 64);
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) K(i, j) = oracle::rbf(X.row(i).transpose(), X.row(j).transpose(), 0.5, 1.0);
        K.diagonal().array() += noise + 1e-8;
        const Matrix L = K.llt().matrixL();
        const Matrix Y = L * standard_normal(rng, 64, 1);
        const Kernel best = gp_tune_grid(X, Y, NoiseModel::isotropic(1, noise), grid);
        hits += std::get<RbfArd>(best.form).lengthscales[0] == 0.5;
    }
    EXPECT_GE(hits, 45);
}

TEST(GpTuneGrid, IdempotentUnderDuplicatedMinimizer) {
    Rng rng = make_stream(49);
    const Matrix X = standard_normal(rng, 20, 1);
    const Matrix Y = X.array().sin();
    const NoiseModel noise = NoiseModel::isotropic(1, 0.01);
    std::vector<Kernel> grid = {Kernel::rbf(Vector::Constant(1, 0.1), 1.0), Kernel::rbf(Vector::Constant(1, 1.0), 1.0),
                                Kernel::rbf(Vector::Constant(1, 10.0), 1.0)};
    const Kernel best = gp_tune_grid(X, Y, noise, grid);
    grid.push_back(best);
    const Kernel again = gp_tune_grid(X, Y, noise, grid);
    EXPECT_EQ(std::get<RbfArd>(again.form).lengthscales, std::get<RbfArd>(best.form).lengthscales);
}

#include "rftune/random.hpp"
#include "rftune/shrinkage.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace rftune;

// Reference values frozen from sklearn.covariance.ledoit_wolf on the same data.
TEST(LedoitWolf, MatchesReferenceThreeDim) {
    Matrix X(6, 3);
    X << 1.0, 2.0, 0.5, 0.3, -1.0, 2.0, -0.7, 0.4, 1.1, 2.2, 1.5, -0.3, 0.0, -0.6, 0.9, 1.4, 0.8, 0.2;
    Matrix expected(3, 3);
    expected << 0.8928976213097594, 0.44291283804379056, -0.3777431016558759, 0.44291283804379056, 1.0580345150581483,
        -0.4421082733970262, -0.3777431016558759, -0.4421082733970262, 0.6193456414098705;
    const ShrunkCovariance s = ledoit_wolf(X);
    EXPECT_NEAR(s.intensity, 0.2758918179120591, 1e-13);
    EXPECT_LT((s.covariance - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LedoitWolf, FullShrinkageReference) {
    Matrix X(4, 2);
    X << 0.1, 0.2, 0.15, 0.22, 0.09, 0.21, 0.12, 0.18;
    const ShrunkCovariance s = ledoit_wolf(X);
    EXPECT_NEAR(s.intensity, 1.0, 1e-12);
    EXPECT_TRUE(s.covariance.isApprox(0.000371875 * Matrix::Identity(2, 2), 1e-10));
}

TEST(LedoitWolf, WellConditionedWhenUndersampled) {
    Rng rng = make_stream(51);
    const Matrix X = standard_normal(rng, 5, 20);
    const ShrunkCovariance s = ledoit_wolf(X);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(s.covariance);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_GE(s.intensity, 0.0);
    EXPECT_LE(s.intensity, 1.0);
    EXPECT_NEAR(s.covariance.trace(), ((X.rowwise() - X.colwise().mean()).squaredNorm() / 5.0), 1e-10);
}

TEST(LedoitWolf, NeedsTwoSamples) {
    EXPECT_THROW(ledoit_wolf(Matrix::Zero(1, 3)), InvalidArgument);
}

TEST(SpdRoots, InverseSquareRoot) {
    Rng rng = make_stream(52);
    const Matrix a = standard_normal(rng, 4, 4);
    const Matrix spd = a * a.transpose() + Matrix::Identity(4, 4);
    const Matrix w = inverse_sqrt_spd(spd);
    EXPECT_TRUE((w * spd * w).isIdentity(1e-10));
    const Matrix r = sqrt_spd(spd);
    EXPECT_TRUE((r * r).isApprox(spd, 1e-12));
    EXPECT_THROW(inverse_sqrt_spd(-spd), FactorizationFailure);
}

#include "rftune/shrinkage.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace rftune {

ShrunkCovariance ledoit_wolf(const Matrix& samples) {
    const Index n = samples.rows();
    const Index dim = samples.cols();
    if (n < 2 || dim < 1) throw InvalidArgument("ledoit_wolf: need at least two samples");
    ShrunkCovariance out;
    out.mean = samples.colwise().mean();
    const Matrix x = samples.rowwise() - out.mean.transpose();
    const double nd = static_cast<double>(n);
    const double pd = static_cast<double>(dim);

    const Matrix emp = x.transpose() * x / nd;
    const double mu = emp.trace() / pd;
    const Matrix x2 = x.array().square().matrix();
    const double beta_sum = (x2.transpose() * x2).sum();
    const double delta_sum = (x.transpose() * x).array().square().sum() / (nd * nd);
    double beta = (beta_sum / nd - delta_sum) / (pd * nd);
    const double delta = (delta_sum - 2.0 * mu * emp.trace() + pd * mu * mu) / pd;
    beta = std::min(beta, delta);
    out.intensity = (beta == 0.0) ? 0.0 : beta / delta;
    out.covariance = (1.0 - out.intensity) * emp;
    out.covariance.diagonal().array() += out.intensity * mu;
    return out;
}

namespace {

Matrix spectral_power(const Matrix& spd, double power) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(spd);
    if (eig.info() != Eigen::Success) throw FactorizationFailure("eigendecomposition failed");
    if ((eig.eigenvalues().array() <= 0.0).any()) throw FactorizationFailure("matrix is not positive definite");
    const Vector scaled = eig.eigenvalues().array().pow(power);
    return eig.eigenvectors() * scaled.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Matrix inverse_sqrt_spd(const Matrix& spd) { return spectral_power(spd, -0.5); }

Matrix sqrt_spd(const Matrix& spd) { return spectral_power(spd, 0.5); }

}  // namespace rftune

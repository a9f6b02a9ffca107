#include "rftune/rfr.hpp"

#include <cmath>

namespace rftune {

NoiseModel::NoiseModel(Matrix covariance) : covariance_(std::move(covariance)) {
    if (covariance_.rows() != covariance_.cols() || covariance_.rows() == 0)
        throw DimensionMismatch("noise covariance must be square and nonempty");
    if (!covariance_.allFinite()) throw InvalidArgument("noise covariance must be finite");
    const double asym = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, covariance_.cwiseAbs().maxCoeff()))
        throw InvalidArgument("noise covariance must be symmetric");
    Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) throw FactorizationFailure("noise covariance is not positive definite");
    factor_ = llt.matrixL();
    log_det_ = 2.0 * factor_.diagonal().array().log().sum();
}

NoiseModel NoiseModel::isotropic(int p, double variance) {
    if (!(variance > 0.0)) throw NonpositiveParameter("noise variance must be positive");
    return NoiseModel(variance * Matrix::Identity(p, p));
}

void NoiseModel::whiten_stacked(Matrix& stacked) const {
    const Index p = dim();
    if (stacked.rows() % p != 0) throw DimensionMismatch("stacked rows are not a multiple of p");
    // Column-major storage makes every p-block a column of a p x (rows/p * cols) view.
    Eigen::Map<Matrix> blocks(stacked.data(), p, stacked.size() / p);
    if (p == 1)
        blocks /= factor_(0, 0);
    else
        factor_.triangularView<Eigen::Lower>().solveInPlace(blocks);
}

double RFFit::system_log_det() const {
    const Matrix& l = factor.matrixLLT();
    return 2.0 * l.diagonal().array().log().sum();
}

Vector stack_rows(const Matrix& outputs) {
    const Matrix t = outputs.transpose();
    return Eigen::Map<const Vector>(t.data(), t.size());
}

Matrix unstack_rows(const Vector& stacked, int p) {
    if (p < 1 || stacked.size() % p != 0) throw DimensionMismatch("stacked length is not a multiple of p");
    return Eigen::Map<const Matrix>(stacked.data(), p, stacked.size() / p).transpose();
}

namespace {

void factorize(RFFit& f) {
    const Index m = f.system.rows();
    f.factor.compute(f.system);
    if (f.factor.info() == Eigen::Success) return;
    const double jitter = 1e-10 * f.system.trace() / static_cast<double>(m);
    f.system.diagonal().array() += jitter;
    f.jitter += jitter;
    f.factor.compute(f.system);
    if (f.factor.info() != Eigen::Success) throw FactorizationFailure("random feature system is not positive definite");
}

Vector mean_offset(const Vector& prior_mean, int p) {
    if (prior_mean.size() == 0) return Vector::Zero(p);
    if (prior_mean.size() != p) throw DimensionMismatch("prior mean must have length p");
    return prior_mean;
}

}  // namespace

RFFit fit(const FeatureSet& features, const Matrix& inputs, const Matrix& outputs, const NoiseModel& noise,
          const Vector& prior_mean, const FitOptions& options) {
    const int p = features.output_dim;
    if (inputs.rows() != outputs.rows() || inputs.rows() < 1)
        throw DimensionMismatch("fit: inputs and outputs must have the same nonzero row count");
    if (outputs.cols() != p || noise.dim() != p) throw DimensionMismatch("fit: output dimension mismatch");
    if (!outputs.allFinite()) throw InvalidArgument("fit: outputs must be finite");

    RFFit f;
    f.features = features;
    f.noise = noise;
    f.n_train = inputs.rows();
    f.prior_mean = mean_offset(prior_mean, p);
    const double m = static_cast<double>(features.count());

    Matrix phi = evaluate_features(features, inputs);
    noise.whiten_stacked(phi);
    Matrix residual = stack_rows(outputs.rowwise() - f.prior_mean.transpose());
    noise.whiten_stacked(residual);

    f.system.setIdentity(features.count(), features.count());
    f.system.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose(), 1.0 / m);
    f.system.triangularView<Eigen::StrictlyUpper>() = f.system.transpose();
    if (options.jitter > 0.0) {
        f.system.diagonal().array() += options.jitter;
        f.jitter = options.jitter;
    }
    factorize(f);
    f.beta = f.factor.solve(phi.transpose() * residual);
    return f;
}

void refactor(RFFit& f) {
    f.factor.compute(f.system);
    if (f.factor.info() != Eigen::Success) throw FactorizationFailure("stored system is not positive definite");
}

Vector predict_mean(const RFFit& f, const Vector& x) {
    const double m = static_cast<double>(f.features.count());
    return f.prior_mean + evaluate_features_at(f.features, x) * f.beta / m;
}

Matrix predict_mean(const RFFit& f, const Matrix& inputs) {
    const double m = static_cast<double>(f.features.count());
    const Vector stacked = evaluate_features(f.features, inputs) * f.beta / m;
    return unstack_rows(stacked, f.output_dim()).rowwise() + f.prior_mean.transpose();
}

Matrix predict_cov(const RFFit& f, const Vector& x, const Vector& x_prime) {
    const double m = static_cast<double>(f.features.count());
    const Matrix a = evaluate_features_at(f.features, x);
    const Matrix b = evaluate_features_at(f.features, x_prime);
    return a * f.factor.solve(b.transpose()) / m;
}

std::vector<Matrix> predict_cov(const RFFit& f, const Matrix& inputs) {
    const double m = static_cast<double>(f.features.count());
    const int p = f.output_dim();
    // L^{-1} Phi^T for all points at once; covariance blocks are then Gram products.
    Matrix half = evaluate_features(f.features, inputs).transpose();
    f.factor.matrixL().solveInPlace(half);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(inputs.rows()));
    for (Index n = 0; n < inputs.rows(); ++n) {
        const auto block = half.middleCols(n * p, p);
        out.push_back(block.transpose() * block / m);
    }
    return out;
}

Matrix gram_matrix(const FeatureSet& features, const Matrix& inputs, const NoiseModel& noise) {
    Matrix phi = evaluate_features(features, inputs);
    noise.whiten_stacked(phi);
    const double m = static_cast<double>(features.count());
    Matrix g = Matrix::Zero(features.count(), features.count());
    g.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose(), 1.0 / m);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

double logdet_term(const Matrix& gram) {
    if (gram.rows() != gram.cols()) throw DimensionMismatch("logdet_term: matrix must be square");
    Eigen::LLT<Matrix> llt(gram + Matrix::Identity(gram.rows(), gram.cols()));
    if (llt.info() != Eigen::Success) throw FactorizationFailure("logdet_term: G + I is not positive definite");
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace rftune

#include "rftune/gpr.hpp"

#include <cmath>
#include <limits>

namespace rftune {

Kernel Kernel::rbf(Vector lengthscales, double variance, int output_dim, double nugget) {
    Kernel k;
    k.form = RbfArd{std::move(lengthscales), variance};
    k.output_dim = output_dim;
    k.nugget = nugget;
    k.validate();
    return k;
}

Kernel Kernel::finite_rank(FeatureSet features, double nugget) {
    Kernel k;
    k.output_dim = features.output_dim;
    k.form = std::move(features);
    k.nugget = nugget;
    k.validate();
    return k;
}

int Kernel::input_dim() const {
    if (const auto* r = std::get_if<RbfArd>(&form)) return static_cast<int>(r->lengthscales.size());
    return std::get<FeatureSet>(form).input_dim;
}

void Kernel::validate() const {
    if (!(nugget >= 0.0)) throw NonpositiveParameter("kernel nugget must be nonnegative");
    if (output_dim < 1) throw InvalidArgument("kernel output dimension must be positive");
    if (const auto* r = std::get_if<RbfArd>(&form)) {
        if (r->lengthscales.size() == 0 || (r->lengthscales.array() <= 0.0).any() || !(r->variance > 0.0))
            throw NonpositiveParameter("RBF lengthscales and variance must be positive");
    } else {
        std::get<FeatureSet>(form).validate();
    }
}

Matrix Kernel::block(const Vector& x, const Vector& x_prime) const {
    if (const auto* r = std::get_if<RbfArd>(&form)) {
        const double q = ((x - x_prime).array() / r->lengthscales.array()).square().sum();
        return r->variance * std::exp(-0.5 * q) * Matrix::Identity(output_dim, output_dim);
    }
    return approximate_kernel(std::get<FeatureSet>(form), x, x_prime);
}

Matrix Kernel::dense(const Matrix& inputs, const Matrix& inputs_prime) const {
    if (inputs.cols() != input_dim() || inputs_prime.cols() != input_dim())
        throw DimensionMismatch("kernel: input dimension mismatch");
    if (const auto* fs = std::get_if<FeatureSet>(&form)) {
        const Matrix a = evaluate_features(*fs, inputs);
        const Matrix b = evaluate_features(*fs, inputs_prime);
        return a * b.transpose() / static_cast<double>(fs->count());
    }
    const Index p = output_dim;
    Matrix k = Matrix::Zero(inputs.rows() * p, inputs_prime.rows() * p);
    for (Index i = 0; i < inputs.rows(); ++i)
        for (Index j = 0; j < inputs_prime.rows(); ++j)
            k.block(i * p, j * p, p, p) = block(inputs.row(i).transpose(), inputs_prime.row(j).transpose());
    return k;
}

namespace {

struct Assembled {
    Eigen::LLT<Matrix> factor;
    Vector residual;
    Vector prior_mean;
};

Assembled assemble(const Kernel& kernel, const Matrix& inputs, const Matrix& outputs, const NoiseModel& noise,
                   const Vector& prior_mean, Index cap) {
    kernel.validate();
    const Index p = kernel.output_dim;
    if (inputs.rows() != outputs.rows() || outputs.cols() != p || noise.dim() != p)
        throw DimensionMismatch("gp: data dimensions do not match the kernel");
    const Index np = inputs.rows() * p;
    if (np > cap) throw CapExceeded("gp: N p = " + std::to_string(np) + " exceeds the cap " + std::to_string(cap));
    Assembled a;
    a.prior_mean = prior_mean.size() == 0 ? Vector::Zero(p) : prior_mean;
    if (a.prior_mean.size() != p) throw DimensionMismatch("gp: prior mean must have length p");
    Matrix k = kernel.dense(inputs, inputs);
    for (Index n = 0; n < inputs.rows(); ++n) k.block(n * p, n * p, p, p) += noise.covariance();
    k.diagonal().array() += kernel.nugget;
    a.factor.compute(k);
    if (a.factor.info() != Eigen::Success) throw FactorizationFailure("gp: K + B_Sigma is not positive definite");
    a.residual = stack_rows(outputs.rowwise() - a.prior_mean.transpose());
    return a;
}

}  // namespace

GPFit gp_fit(const Kernel& kernel, const Matrix& inputs, const Matrix& outputs, const NoiseModel& noise,
             const Vector& prior_mean, Index cap) {
    Assembled a = assemble(kernel, inputs, outputs, noise, prior_mean, cap);
    GPFit f;
    f.kernel = kernel;
    f.inputs = inputs;
    f.alpha = a.factor.solve(a.residual);
    f.factor = std::move(a.factor);
    f.prior_mean = std::move(a.prior_mean);
    return f;
}

GPPrediction gp_predict(const GPFit& f, const Vector& x) {
    const Matrix query = x.transpose();
    const Matrix cross = f.kernel.dense(query, f.inputs);  // p x N p
    GPPrediction out;
    out.mean = f.prior_mean + cross * f.alpha;
    out.covariance = f.kernel.block(x, x) - cross * f.factor.solve(cross.transpose());
    return out;
}

Matrix gp_predict_mean(const GPFit& f, const Matrix& inputs) {
    const Matrix cross = f.kernel.dense(inputs, f.inputs);
    return unstack_rows(cross * f.alpha, f.kernel.output_dim).rowwise() + f.prior_mean.transpose();
}

double neg_log_marginal_likelihood(const Kernel& kernel, const Matrix& inputs, const Matrix& outputs,
                                   const NoiseModel& noise, const Vector& prior_mean, Index cap) {
    const Assembled a = assemble(kernel, inputs, outputs, noise, prior_mean, cap);
    const double quad = a.residual.dot(a.factor.solve(a.residual));
    const double log_det = 2.0 * a.factor.matrixLLT().diagonal().array().log().sum();
    return quad + log_det;
}

Kernel gp_tune_grid(const Matrix& inputs, const Matrix& outputs, const NoiseModel& noise,
                    const std::vector<Kernel>& grid, Index cap) {
    if (grid.empty()) throw InvalidArgument("gp_tune_grid: empty grid");
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double value = std::numeric_limits<double>::infinity();
        try {
            value = neg_log_marginal_likelihood(grid[i], inputs, outputs, noise, Vector(), cap);
        } catch (const FactorizationFailure&) {
        }
        if (value < best) {
            best = value;
            best_index = i;
        }
    }
    return grid[best_index];
}

}  // namespace rftune

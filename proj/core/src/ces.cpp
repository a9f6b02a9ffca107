#include "rftune/ces.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>

namespace rftune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logit(double v) { return std::log(v / (1.0 - v)); }

}  // namespace

BoundedPrior BoundedPrior::from_centers(std::vector<std::string> names, Vector lower, Vector upper,
                                        const Vector& centers, double stddev) {
    BoundedPrior p;
    p.names = std::move(names);
    p.lower = std::move(lower);
    p.upper = std::move(upper);
    p.stddev = Vector::Constant(p.lower.size(), stddev);
    p.mean.resize(p.lower.size());
    for (Index i = 0; i < p.lower.size(); ++i) {
        const double unit = (centers[i] - p.lower[i]) / (p.upper[i] - p.lower[i]);
        if (!(unit > 0.0 && unit < 1.0)) throw InvalidArgument("bounded prior: center outside the bounds");
        p.mean[i] = logit(unit);
    }
    p.validate();
    return p;
}

void BoundedPrior::validate() const {
    const Index d = lower.size();
    if (upper.size() != d || mean.size() != d || stddev.size() != d)
        throw DimensionMismatch("bounded prior: inconsistent lengths");
    if (!(upper.array() > lower.array()).all()) throw InvalidArgument("bounded prior: upper must exceed lower");
    if (!(stddev.array() > 0.0).all()) throw NonpositiveParameter("bounded prior: stddev must be positive");
}

Vector BoundedPrior::to_physical(const Vector& phi) const {
    const Vector unit = (1.0 / (1.0 + (-phi.array()).exp())).matrix();
    return lower + (upper - lower).cwiseProduct(unit);
}

Vector BoundedPrior::to_unconstrained(const Vector& theta) const {
    Vector phi(theta.size());
    for (Index i = 0; i < theta.size(); ++i) phi[i] = logit((theta[i] - lower[i]) / (upper[i] - lower[i]));
    return phi;
}

double BoundedPrior::neg_log_density(const Vector& phi) const {
    if (phi.size() != dim()) throw DimensionMismatch("bounded prior: wrong parameter length");
    if (!phi.allFinite()) return kInf;
    const Vector z = (phi - mean).cwiseQuotient(stddev);
    return 0.5 * z.squaredNorm() + stddev.array().log().sum() + 0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi);
}

Vector BoundedPrior::sample(Rng& rng) const { return mean + stddev.cwiseProduct(standard_normal(rng, dim())); }

BoundedPrior default_physical_prior() {
    Vector lower(5), upper(5), centers(5);
    lower << 0.0, 0.0, 0.01, 0.01, 0.01;
    upper << 1.0, 1.0, 1.0, 1.0, 1.0;
    centers << 0.13, 0.51, 0.14, 0.22, 0.40;
    return BoundedPrior::from_centers({"entrainment_factor", "detrainment_factor", "tke_ed_coeff", "tke_diss_coeff",
                                       "static_stab_coeff"},
                                      lower, upper, centers);
}

double emulated_neg_log_posterior(const Vector& phi, const EmulatedPosterior& post) {
    const double prior = post.neg_log_prior ? post.neg_log_prior(phi) : 0.0;
    if (!std::isfinite(prior)) return kInf;
    const Vector g = post.mean(phi);
    if (!g.allFinite() || g.size() != post.observation.size()) return kInf;
    const Matrix gamma = post.covariance ? post.covariance(phi) : post.noise;
    Eigen::LLT<Matrix> llt(gamma);
    if (llt.info() != Eigen::Success) return kInf;
    const Vector r = llt.matrixL().solve(post.observation - g);
    const double half_log_det = llt.matrixLLT().diagonal().array().log().sum();
    return 0.5 * r.squaredNorm() + half_log_det + prior;
}

ChainState rwm_step(const ChainState& state, const NegLogDensity& target, double step, Rng& rng, bool* accepted) {
    ChainState proposal;
    proposal.theta = state.theta + step * standard_normal(rng, state.theta.size());
    proposal.value = target(proposal.theta);
    const double u = uniform(rng, 0.0, 1.0);
    const bool accept = std::isfinite(proposal.value) && std::log(u) < state.value - proposal.value;
    if (accepted) *accepted = accept;
    return accept ? proposal : state;
}

StepTuning tune_step_size(const NegLogDensity& target, const Vector& start, Rng& rng, const StepTunerOptions& o) {
    if (!(o.target > 0.05 && o.target < 0.95)) throw InvalidArgument("tune_step_size: target must lie in (0.05, 0.95)");
    if (!(o.initial_step > 0.0) || o.pilot_steps < 1) throw InvalidArgument("tune_step_size: invalid pilot settings");
    StepTuning t;
    t.state = {start, target(start)};
    if (!std::isfinite(t.state.value)) throw InvalidArgument("tune_step_size: start has zero density");
    double step = o.initial_step;
    double too_small = 0.0;  // largest step seen with acceptance above the band
    double too_large = 0.0;  // smallest step seen with acceptance below the band
    for (int round = 1; round <= o.max_rounds; ++round) {
        Index accepted = 0;
        for (Index k = 0; k < o.pilot_steps; ++k) {
            bool acc = false;
            t.state = rwm_step(t.state, target, step, rng, &acc);
            accepted += acc ? 1 : 0;
        }
        t.tried_steps.push_back(step);
        t.rounds = round;
        t.acceptance = static_cast<double>(accepted) / static_cast<double>(o.pilot_steps);
        t.step = step;
        if (std::abs(t.acceptance - o.target) <= o.tolerance) return t;
        if (t.acceptance > o.target) too_small = std::max(too_small, step);
        else too_large = too_large > 0.0 ? std::min(too_large, step) : step;
        if (too_small > 0.0 && too_large > 0.0)
            step = std::sqrt(too_small * too_large);
        else
            step = t.acceptance > o.target ? 2.0 * step : 0.5 * step;
    }
    throw NonConvergence("tune_step_size: acceptance did not reach the target band");
}

Vector MCMCChain::mean() const { return samples.colwise().mean().transpose(); }

Matrix MCMCChain::covariance() const {
    const Matrix centered = samples.rowwise() - samples.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(std::max<Index>(1, samples.rows() - 1));
}

MCMCChain run_chain(const NegLogDensity& target, const Vector& start, double step, Index n_steps, Index burn_in,
                    Rng& rng) {
    if (n_steps <= burn_in || burn_in < 0) throw InvalidArgument("run_chain: need n_steps > burn_in >= 0");
    MCMCChain chain;
    chain.step = step;
    chain.samples.resize(n_steps - burn_in, start.size());
    chain.values.resize(n_steps - burn_in);
    ChainState state{start, target(start)};
    if (!std::isfinite(state.value)) throw InvalidArgument("run_chain: start has zero density");
    for (Index k = 0; k < n_steps; ++k) {
        bool acc = false;
        state = rwm_step(state, target, step, rng, &acc);
        ++chain.proposed;
        chain.accepted += acc ? 1 : 0;
        if (k >= burn_in) {
            chain.samples.row(k - burn_in) = state.theta.transpose();
            chain.values[k - burn_in] = state.value;
        }
    }
    return chain;
}

Vector SyntheticMap::operator()(const Vector& theta) const {
    if (theta.size() != B.cols()) throw DimensionMismatch("synthetic map: wrong input length");
    return A * (B * theta).array().tanh().matrix() + c;
}

SyntheticMap make_synthetic_map(int input_dim, int output_dim, std::uint64_t seed, double input_gain) {
    if (input_dim < 1 || output_dim < 1) throw InvalidArgument("synthetic map: dimensions must be positive");
    Rng rng = make_stream(seed, {stream_tag::data, 0x73796e74ULL});
    SyntheticMap g;
    g.B = input_gain / std::sqrt(static_cast<double>(input_dim)) * standard_normal(rng, input_dim, input_dim);
    g.A = standard_normal(rng, output_dim, input_dim);
    g.c = 0.1 * standard_normal(rng, output_dim);
    return g;
}

Matrix pairwise_histogram(const Matrix& samples, Index i, Index j, int bins, const Vector& lo, const Vector& hi) {
    if (bins < 1) throw InvalidArgument("pairwise_histogram: bins must be positive");
    Matrix counts = Matrix::Zero(bins, bins);
    for (Index r = 0; r < samples.rows(); ++r) {
        const double u = (samples(r, i) - lo[i]) / (hi[i] - lo[i]);
        const double v = (samples(r, j) - lo[j]) / (hi[j] - lo[j]);
        if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) continue;
        counts(static_cast<Index>(u * bins), static_cast<Index>(v * bins)) += 1.0;
    }
    return counts;
}

}  // namespace rftune

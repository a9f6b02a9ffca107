#include "rftune/dynamics.hpp"

#include "rftune/csv.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace rftune {

Trajectory Trajectory::tail(Index first) const {
    if (first < 0 || first > size()) throw InvalidArgument("trajectory tail out of range");
    return {states.bottomRows(size() - first), dt, time(first)};
}

Vector lorenz_vector_field(const Vector& s, const LorenzParameters& p) {
    if (s.size() != 3) throw DimensionMismatch("Lorenz state must have three coordinates");
    Vector f(3);
    f << p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2];
    return f;
}

Vector euler_step(const Vector& state, double dt, const LorenzParameters& params) {
    return state + dt * lorenz_vector_field(state, params);
}

Trajectory euler_integrate(const Vector& initial, double dt, Index n_steps, const LorenzParameters& params) {
    if (!(dt > 0.0)) throw NonpositiveParameter("euler_integrate: dt must be positive");
    if (n_steps < 0) throw InvalidArgument("euler_integrate: negative step count");
    Trajectory t;
    t.dt = dt;
    t.states.resize(n_steps + 1, 3);
    t.states.row(0) = initial.transpose();
    Vector s = initial;
    for (Index k = 1; k <= n_steps; ++k) {
        s = euler_step(s, dt, params);
        if (!s.allFinite()) throw BlowUp("euler_integrate: non-finite state", static_cast<std::size_t>(k));
        t.states.row(k) = s.transpose();
    }
    return t;
}

TrainingPairs make_training_pairs(const Trajectory& trajectory, Index n_pairs, const Matrix& noise, Rng& rng,
                                  PairSampling sampling) {
    const Index available = trajectory.size() - 1;
    if (n_pairs < 1 || n_pairs > available) throw InvalidArgument("make_training_pairs: n_pairs exceeds trajectory length");
    const Index dim = trajectory.states.cols();
    if (noise.rows() != dim || noise.cols() != dim) throw DimensionMismatch("make_training_pairs: noise must be 3 x 3");
    std::vector<Index> starts(static_cast<std::size_t>(available));
    std::iota(starts.begin(), starts.end(), Index{0});
    if (sampling == PairSampling::random) {
        std::shuffle(starts.begin(), starts.end(), rng);
        starts.resize(static_cast<std::size_t>(n_pairs));
        std::sort(starts.begin(), starts.end());
    } else {
        starts.resize(static_cast<std::size_t>(n_pairs));
    }
    Matrix factor = Matrix::Zero(dim, dim);
    if (noise.norm() > 0.0) {
        Eigen::LLT<Matrix> llt(noise);
        if (llt.info() != Eigen::Success) throw FactorizationFailure("make_training_pairs: noise is not positive definite");
        factor = llt.matrixL();
    }
    TrainingPairs pairs;
    pairs.inputs.resize(n_pairs, dim);
    pairs.outputs.resize(n_pairs, dim);
    for (Index i = 0; i < n_pairs; ++i) {
        const Index k = starts[static_cast<std::size_t>(i)];
        pairs.inputs.row(i) = trajectory.states.row(k);
        pairs.outputs.row(i) = trajectory.states.row(k + 1) + (factor * standard_normal(rng, dim)).transpose();
    }
    return pairs;
}

Trajectory emulator_rollout(const StepMap& step, const Vector& initial, Index n_steps, double dt, double bound) {
    Trajectory t;
    t.dt = dt;
    t.states.resize(n_steps + 1, initial.size());
    t.states.row(0) = initial.transpose();
    Vector s = initial;
    for (Index k = 1; k <= n_steps; ++k) {
        s = step(s);
        if (!s.allFinite()) throw BlowUp("rollout: non-finite state", static_cast<std::size_t>(k));
        if (bound > 0.0 && s.cwiseAbs().maxCoeff() > bound)
            throw BlowUp("rollout: state left the bounding box", static_cast<std::size_t>(k));
        t.states.row(k) = s.transpose();
    }
    return t;
}

namespace {

double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

std::vector<double> column(const Matrix& m, Index c) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, c);
    return v;
}

}  // namespace

Vector marginal_cdf_distance(const Trajectory& a, const Trajectory& b) {
    if (a.size() == 0 || b.size() == 0) throw InvalidArgument("marginal_cdf_distance: empty trajectory");
    if (a.states.cols() != b.states.cols()) throw DimensionMismatch("marginal_cdf_distance: state sizes differ");
    Vector d(a.states.cols());
    for (Index c = 0; c < d.size(); ++c) d[c] = ks_distance(column(a.states, c), column(b.states, c));
    return d;
}

double valid_time(const Trajectory& rollout, const Trajectory& truth, double threshold) {
    const Index n = std::min(rollout.size(), truth.size());
    for (Index k = 0; k < n; ++k)
        if ((rollout.states.row(k) - truth.states.row(k)).cwiseAbs().maxCoeff() > threshold)
            return static_cast<double>(k) * rollout.dt;
    return static_cast<double>(n - 1) * rollout.dt;
}

void write_trajectory_csv(const std::string& path, const Trajectory& t, Index stride) {
    if (stride < 1) throw InvalidArgument("write_trajectory_csv: stride must be positive");
    const Index rows = (t.size() + stride - 1) / stride;
    Matrix out(rows, 4);
    for (Index r = 0; r < rows; ++r) {
        out(r, 0) = t.time(r * stride);
        out.block(r, 1, 1, 3) = t.states.row(r * stride);
    }
    write_csv(path, {"t", "x", "y", "z"}, out);
}

Matrix marginal_cdf_table(const Trajectory& t, const Vector& grid) {
    Matrix out(grid.size(), 1 + t.states.cols());
    out.col(0) = grid;
    for (Index c = 0; c < t.states.cols(); ++c) {
        std::vector<double> v = column(t.states, c);
        std::sort(v.begin(), v.end());
        for (Index g = 0; g < grid.size(); ++g) {
            const auto it = std::upper_bound(v.begin(), v.end(), grid[g]);
            out(g, 1 + c) = static_cast<double>(it - v.begin()) / static_cast<double>(v.size());
        }
    }
    return out;
}

}  // namespace rftune

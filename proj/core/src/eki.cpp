#include "rftune/eki.hpp"

#include "rftune/csv.hpp"
#include "rftune/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace rftune {

ObservationSpec::ObservationSpec(Vector target_in, Matrix noise_in)
    : target(std::move(target_in)), noise(std::move(noise_in)) {
    if (noise.rows() != target.size() || noise.cols() != target.size())
        throw DimensionMismatch("observation noise must be n x n for an n-vector target");
    Eigen::LLT<Matrix> llt(noise);
    if (llt.info() != Eigen::Success) throw FactorizationFailure("observation noise is not positive definite");
    factor_ = llt.matrixL();
}

Vector ObservationSpec::half_misfits(const Matrix& evaluations) const {
    Matrix r = (-evaluations).colwise() + target;
    factor_.triangularView<Eigen::Lower>().solveInPlace(r);
    return 0.5 * r.colwise().squaredNorm().transpose();
}

void EKISettings::validate() const {
    if (max_iterations < 0) throw InvalidArgument("EKI: max_iterations must be nonnegative");
    if (!(terminal_time > 0.0)) throw NonpositiveParameter("EKI: terminal time must be positive");
    if (scheduler == Scheduler::constant && !(timestep > 0.0)) throw NonpositiveParameter("EKI: timestep must be positive");
    if (!(inflation_std >= 0.0)) throw InvalidArgument("EKI: inflation std must be nonnegative");
}

Ensemble init_ensemble(const Vector& mean, const Vector& stddev, Index size, Rng& rng) {
    if (size < 2) throw InvalidArgument("ensemble needs at least two members");
    if (mean.size() != stddev.size()) throw DimensionMismatch("init_ensemble: mean/std length mismatch");
    Ensemble e;
    e.members.resize(mean.size(), size);
    for (Index j = 0; j < size; ++j) e.members.col(j) = mean + stddev.cwiseProduct(standard_normal(rng, mean.size()));
    return e;
}

Ensemble init_ensemble(const PriorSpec& prior, Index size, Rng& rng) {
    return init_ensemble(prior.mean(), prior.stddev(), size, rng);
}

EnsembleCovariances empirical_covariances(const Matrix& members, const Matrix& evaluations) {
    if (members.cols() != evaluations.cols() || members.cols() < 1)
        throw DimensionMismatch("empirical_covariances: member and evaluation counts differ");
    const double j = static_cast<double>(members.cols());
    const Matrix du = members.colwise() - members.rowwise().mean();
    const Matrix dg = evaluations.colwise() - evaluations.rowwise().mean();
    return {du * dg.transpose() / j, dg * dg.transpose() / j};
}

Ensemble update_step(const Ensemble& ensemble, const Matrix& evaluations, const ObservationSpec& obs, double dt,
                     std::span<Rng> member_rngs, double inflation_std) {
    if (!(dt > 0.0)) throw NonpositiveParameter("update_step: dt must be positive");
    const Index members = ensemble.size();
    if (static_cast<Index>(member_rngs.size()) != members) throw DimensionMismatch("update_step: one rng per member");
    if (evaluations.rows() != obs.dim()) throw DimensionMismatch("update_step: evaluation/observation size mismatch");

    const auto cov = empirical_covariances(ensemble.members, evaluations);
    Matrix system = cov.evaluation + obs.noise / dt;
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() != Eigen::Success) throw FactorizationFailure("update_step: C^GG + Gamma/dt is not positive definite");

    const double noise_scale = 1.0 / std::sqrt(dt);
    Matrix innovations(obs.dim(), members);
    Matrix inflation(ensemble.dim(), members);
    for (Index j = 0; j < members; ++j) {
        Rng& rng = member_rngs[static_cast<std::size_t>(j)];
        const Vector xi = noise_scale * (obs.factor() * standard_normal(rng, obs.dim()));
        innovations.col(j) = obs.target + xi - evaluations.col(j);
        if (inflation_std > 0.0)
            inflation.col(j) = inflation_std * standard_normal(rng, ensemble.dim());
        else
            inflation.col(j).setZero();
    }
    Ensemble next = ensemble;
    next.members += cov.cross * llt.solve(innovations) + inflation;
    next.time += dt;
    next.iteration += 1;
    return next;
}

double adaptive_timestep(const Ensemble& ensemble, const ObservationSpec& obs, const Matrix& evaluations,
                         double terminal_time) {
    const double remaining = terminal_time - ensemble.time;
    if (remaining <= 0.0) return 0.0;
    const Vector phi = obs.half_misfits(evaluations);
    const double mean = phi.mean();
    if (!(mean > 0.0)) return remaining;
    const double n = static_cast<double>(obs.dim());
    const double var = (phi.array() - mean).square().sum() / std::max<double>(1.0, static_cast<double>(phi.size() - 1));
    double dt = n / (2.0 * mean);
    if (var > 0.0) dt = std::max(dt, std::sqrt(n / (2.0 * var)));
    return std::clamp(dt, std::min(1e-6, remaining), remaining);
}

int evaluate_ensemble(Ensemble& ensemble, const ForwardMap& forward, std::uint64_t seed, int workers,
                      int max_resamples, Matrix& evaluations) {
    const Index members = ensemble.size();
    std::vector<Vector> out(static_cast<std::size_t>(members));
    std::vector<char> ok(static_cast<std::size_t>(members), 0);
    auto attempt = [&](std::size_t j, int round) {
        Rng rng = make_stream(seed, {stream_tag::forward, static_cast<std::uint64_t>(ensemble.iteration), j,
                                     static_cast<std::uint64_t>(round)});
        try {
            Vector g = forward(ensemble.members.col(static_cast<Index>(j)), rng);
            ok[j] = g.allFinite() ? 1 : 0;
            out[j] = std::move(g);
        } catch (const NumericalError&) {
            ok[j] = 0;
        }
    };
    parallel_for(static_cast<std::size_t>(members), workers, [&](std::size_t j) { attempt(j, 0); });

    int resampled = 0;
    for (int round = 1; round <= max_resamples; ++round) {
        std::vector<std::size_t> failed;
        for (std::size_t j = 0; j < ok.size(); ++j)
            if (!ok[j]) failed.push_back(j);
        if (failed.empty()) break;
        if (failed.size() == ok.size()) throw ForwardMapFailure("every ensemble member failed to evaluate");
        // Empirical Gaussian of the members that evaluated successfully.
        Matrix good(ensemble.dim(), static_cast<Index>(ok.size() - failed.size()));
        for (std::size_t j = 0, k = 0; j < ok.size(); ++j)
            if (ok[j]) good.col(static_cast<Index>(k++)) = ensemble.members.col(static_cast<Index>(j));
        const Vector mean = good.rowwise().mean();
        const Matrix centered = good.colwise() - mean;
        const double scale = 1.0 / std::sqrt(static_cast<double>(good.cols()));
        for (std::size_t j : failed) {
            Rng rng = make_stream(seed, {stream_tag::resample, static_cast<std::uint64_t>(ensemble.iteration), j,
                                         static_cast<std::uint64_t>(round)});
            ensemble.members.col(static_cast<Index>(j)) = mean + scale * centered * standard_normal(rng, good.cols());
            ++resampled;
        }
        parallel_for(failed.size(), workers, [&](std::size_t k) { attempt(failed[k], round); });
    }
    for (std::size_t j = 0; j < ok.size(); ++j)
        if (!ok[j]) throw ForwardMapFailure("forward map failed after resampling member " + std::to_string(j));

    evaluations.resize(out.front().size(), members);
    for (Index j = 0; j < members; ++j) {
        if (out[static_cast<std::size_t>(j)].size() != evaluations.rows())
            throw DimensionMismatch("forward map returned inconsistent output lengths");
        evaluations.col(j) = out[static_cast<std::size_t>(j)];
    }
    return resampled;
}

EKIResult run(const ForwardMap& forward, const Ensemble& initial, const ObservationSpec& obs,
              const EKISettings& settings) {
    settings.validate();
    EKIResult result;
    result.ensemble = initial;
    Ensemble& e = result.ensemble;
    Matrix evaluations;
    while (e.iteration < settings.max_iterations && e.time < settings.terminal_time) {
        EKIRecord rec;
        rec.iteration = e.iteration;
        rec.time = e.time;
        rec.resampled = evaluate_ensemble(e, forward, settings.seed, settings.workers, settings.max_resamples,
                                          evaluations);
        if (evaluations.rows() != obs.dim()) throw DimensionMismatch("forward map output does not match observable");
        const Vector norms = e.members.colwise().norm();
        rec.min_norm = norms.minCoeff();
        rec.max_norm = norms.maxCoeff();
        rec.misfit = 2.0 * obs.half_misfits(evaluations).mean() / static_cast<double>(obs.dim());
        if (settings.keep_history) {
            result.member_history.push_back(e.members);
            result.evaluation_history.push_back(evaluations);
        }
        const double remaining = settings.terminal_time - e.time;
        rec.timestep = settings.scheduler == Scheduler::adaptive
                           ? adaptive_timestep(e, obs, evaluations, settings.terminal_time)
                           : std::min(settings.timestep, remaining);
        std::vector<Rng> rngs;
        rngs.reserve(static_cast<std::size_t>(e.size()));
        for (Index j = 0; j < e.size(); ++j)
            rngs.push_back(make_stream(settings.seed, {stream_tag::perturb, static_cast<std::uint64_t>(e.iteration),
                                                       static_cast<std::uint64_t>(j)}));
        e = update_step(e, evaluations, obs, rec.timestep, rngs, settings.inflation_std);
        // Land exactly on T when the step was clipped to the remaining time.
        if (rec.timestep == remaining) e.time = settings.terminal_time;
        result.trace.push_back(rec);
    }
    return result;
}

void write_trace_csv(const std::string& path, const std::vector<EKIRecord>& trace) {
    Matrix rows(static_cast<Index>(trace.size()), 7);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& r = trace[i];
        rows.row(static_cast<Index>(i)) << r.iteration, r.time, r.timestep, r.misfit, r.min_norm, r.max_norm,
            r.resampled;
    }
    write_csv(path, {"iteration", "time", "timestep", "misfit", "min_norm", "max_norm", "resampled"}, rows);
}

}  // namespace rftune

#include "rftune/eki.hpp"
#include "rftune/feature_models.hpp"
#include "rftune/rfr.hpp"

#include <benchmark/benchmark.h>

using namespace rftune;

namespace {

FeatureDistribution rbf_1d() {
    FeatureDistribution dist;
    dist.scale = 2.0;
    dist.U = Matrix::Zero(1, 1);
    dist.S = Vector::Ones(1);
    return dist;
}

struct Data {
    Matrix X, Y;
};

Data make_data(Index n) {
    Rng rng = make_stream(1);
    Data d;
    d.X = standard_normal(rng, n, 1);
    d.Y = d.X.array().sin().matrix();
    return d;
}

}  // namespace

static void BM_Fit(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    Rng rng = make_stream(2);
    const FeatureSet fs = sample_features(rbf_1d(), m, rng);
    const Data d = make_data(1000);
    const NoiseModel noise = NoiseModel::isotropic(1, 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(fit(fs, d.X, d.Y, noise));
    state.SetComplexityN(m);
}
BENCHMARK(BM_Fit)->RangeMultiplier(2)->Range(250, 2000)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_PredictMean(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    Rng rng = make_stream(3);
    const FeatureSet fs = sample_features(rbf_1d(), m, rng);
    const Data d = make_data(500);
    const RFFit f = fit(fs, d.X, d.Y, NoiseModel::isotropic(1, 0.01));
    const Matrix xs = standard_normal(rng, 1000, 1);
    for (auto _ : state) benchmark::DoNotOptimize(predict_mean(f, xs));
    state.SetComplexityN(m);
}
BENCHMARK(BM_PredictMean)->RangeMultiplier(2)->Range(250, 2000)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

static void BM_EkiStep(benchmark::State& state) {
    const Index members = state.range(0);
    Rng rng = make_stream(4);
    const Matrix A = standard_normal(rng, 20, 10);
    const ObservationSpec obs(Vector::Zero(20), Matrix::Identity(20, 20));
    const ForwardMap forward = [&A](const Vector& u, Rng&) { return Vector(A * u); };
    Ensemble ens = init_ensemble(Vector::Zero(10), Vector::Ones(10), members, rng);
    EKISettings s;
    s.max_iterations = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run(forward, ens, obs, s));
}
BENCHMARK(BM_EkiStep)->Arg(30)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

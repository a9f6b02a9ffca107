#include "rftune/hyperparams.hpp"
#include "rftune/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace rftune;

namespace {

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    return v[k];
}

FeatureDistribution random_distribution(const HyperparamSpec& spec, Rng& rng) {
    FeatureDistribution dist;
    dist.kind = spec.kind;
    dist.input_dim = spec.input_dim;
    dist.output_dim = spec.output_dim;
    dist.scale = std::exp(standard_normal(rng));
    if (spec.kind == FeatureKind::nonseparable) {
        dist.U = standard_normal(rng, spec.input_dim * spec.output_dim, spec.rank);
        dist.S = standard_normal(rng, spec.rank).array().exp();
    } else {
        dist.V_in = standard_normal(rng, spec.input_dim, spec.rank_in);
        dist.T_in = standard_normal(rng, spec.rank_in).array().exp();
        dist.V_out = standard_normal(rng, spec.output_dim, spec.rank_out);
        dist.T_out = standard_normal(rng, spec.rank_out).array().exp();
    }
    return dist;
}

}  // namespace

TEST(ParameterCount, IshigamiConfiguration) {
    EXPECT_EQ(parameter_count(HyperparamSpec::nonseparable(3, 1, 3)), 13);
}

TEST(ParameterCount, LorenzConfiguration) {
    EXPECT_EQ(parameter_count(HyperparamSpec::nonseparable(3, 3, 4)), 41);
}

TEST(ParameterCount, ScalarRankOne) {
    EXPECT_EQ(parameter_count(HyperparamSpec::nonseparable(1, 1, 1)), 3);
}

TEST(ParameterCount, Separable) {
    // 1 + r_in (d + 1) + r_out (p + 1)
    EXPECT_EQ(parameter_count(HyperparamSpec::separable(5, 6, 3, 2)), 1 + 3 * 6 + 2 * 7);
}

TEST(HyperparamSpec, RejectsBadRanks) {
    EXPECT_THROW(HyperparamSpec::nonseparable(2, 1, 3).validate(), InvalidRank);
    EXPECT_THROW(HyperparamSpec::nonseparable(2, 1, 0).validate(), InvalidRank);
    EXPECT_THROW(HyperparamSpec::separable(2, 2, 3, 1).validate(), InvalidRank);
    EXPECT_THROW(HyperparamSpec::separable(2, 2, 1, 3).validate(), InvalidRank);
}

TEST(Constrain, ZeroVectorIsPriorMedian) {
    const auto spec = HyperparamSpec::nonseparable(3, 1, 3);
    const FeatureDistribution dist = constrain(Vector::Zero(13), spec);
    EXPECT_DOUBLE_EQ(dist.scale, 1.0);
    EXPECT_TRUE(dist.U.isZero(0.0));
    EXPECT_TRUE(dist.S.isOnes(0.0));
}

TEST(Constrain, ScaleSlot) {
    const auto spec = HyperparamSpec::nonseparable(2, 1, 1);
    Vector u = Vector::Zero(parameter_count(spec));
    u[0] = std::log(2.0);
    EXPECT_NEAR(constrain(u, spec).scale, 2.0, 1e-15);
}

TEST(Constrain, WrongLengthThrows) {
    EXPECT_THROW(constrain(Vector::Zero(5), HyperparamSpec::nonseparable(2, 1, 1)), DimensionMismatch);
}

TEST(Unconstrain, PriorMedianMapsToZero) {
    const auto spec = HyperparamSpec::nonseparable(2, 2, 2);
    const Vector u = unconstrain(constrain(Vector::Zero(parameter_count(spec)), spec), spec);
    EXPECT_TRUE(u.isZero(0.0));
}

TEST(Unconstrain, ScaleOfE) {
    const auto spec = HyperparamSpec::nonseparable(1, 1, 1);
    FeatureDistribution dist = constrain(Vector::Zero(3), spec);
    dist.scale = std::numbers::e;
    EXPECT_NEAR(unconstrain(dist, spec)[0], 1.0, 1e-15);
}

TEST(Unconstrain, RejectsNonpositive) {
    const auto spec = HyperparamSpec::nonseparable(1, 1, 1);
    FeatureDistribution dist = constrain(Vector::Zero(3), spec);
    dist.S[0] = 0.0;
    EXPECT_THROW(unconstrain(dist, spec), NonpositiveParameter);
    dist.S[0] = 1.0;
    dist.scale = -1.0;
    EXPECT_THROW(unconstrain(dist, spec), NonpositiveParameter);
}

TEST(Unconstrain, RoundTripProperty) {
    Rng rng = make_stream(11);
    const std::vector<HyperparamSpec> specs = {HyperparamSpec::nonseparable(3, 1, 3), HyperparamSpec::nonseparable(3, 3, 4),
                                               HyperparamSpec::separable(4, 3, 2, 2), HyperparamSpec::separable(1, 5, 1, 3)};
    for (int trial = 0; trial < 100; ++trial) {
        const HyperparamSpec& spec = specs[static_cast<std::size_t>(trial) % specs.size()];
        const FeatureDistribution dist = random_distribution(spec, rng);
        const FeatureDistribution back = constrain(unconstrain(dist, spec), spec);
        EXPECT_NEAR(back.scale, dist.scale, 1e-12 * dist.scale);
        if (spec.kind == FeatureKind::nonseparable) {
            EXPECT_TRUE(back.U.isApprox(dist.U, 1e-12));
            EXPECT_TRUE(back.S.isApprox(dist.S, 1e-12));
        } else {
            EXPECT_TRUE(back.V_in.isApprox(dist.V_in, 1e-12));
            EXPECT_TRUE(back.T_in.isApprox(dist.T_in, 1e-12));
            EXPECT_TRUE(back.V_out.isApprox(dist.V_out, 1e-12));
            EXPECT_TRUE(back.T_out.isApprox(dist.T_out, 1e-12));
        }
        const Vector u = standard_normal(rng, parameter_count(spec));
        EXPECT_TRUE(unconstrain(constrain(u, spec), spec).isApprox(u, 1e-12));
    }
}

TEST(Unconstrain, ColumnMajorLayout) {
    const auto spec = HyperparamSpec::nonseparable(2, 1, 2);
    Vector u(parameter_count(spec));
    u << 0.0, 1.0, 2.0, 3.0, 4.0, 0.0, 0.0;
    const FeatureDistribution dist = constrain(u, spec);
    EXPECT_DOUBLE_EQ(dist.U(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(dist.U(1, 0), 2.0);
    EXPECT_DOUBLE_EQ(dist.U(0, 1), 3.0);
    EXPECT_DOUBLE_EQ(dist.U(1, 1), 4.0);
}

TEST(SamplePrior, PositiveQuantilesMatchSpan) {
    const auto spec = HyperparamSpec::nonseparable(1, 1, 1);
    const PriorSpec prior = default_prior(spec);
    Rng rng = make_stream(3);
    std::vector<double> scales;
    scales.reserve(100000);
    for (int i = 0; i < 100000; ++i) scales.push_back(std::exp(sample_prior(prior, spec, rng)[0]));
    const double lo = quantile(scales, 0.005);
    const double hi = quantile(scales, 0.995);
    EXPECT_GT(lo, 1e-3 * 0.8);
    EXPECT_LT(lo, 1e-3 * 1.25);
    EXPECT_GT(hi, 1e3 * 0.8);
    EXPECT_LT(hi, 1e3 * 1.25);
}

TEST(SamplePrior, MatrixEntriesCoverSpan) {
    const auto spec = HyperparamSpec::nonseparable(1, 1, 1);
    const PriorSpec prior = default_prior(spec);
    Rng rng = make_stream(4);
    std::vector<double> entries;
    for (int i = 0; i < 100000; ++i) entries.push_back(sample_prior(prior, spec, rng)[1]);
    EXPECT_NEAR(quantile(entries, 0.005), -300.0, 30.0);
    EXPECT_NEAR(quantile(entries, 0.995), 300.0, 30.0);
}

TEST(SamplePrior, Deterministic) {
    const auto spec = HyperparamSpec::nonseparable(3, 3, 4);
    const PriorSpec prior = default_prior(spec);
    Rng a = make_stream(9), b = make_stream(9);
    EXPECT_EQ(sample_prior(prior, spec, a), sample_prior(prior, spec, b));
}

TEST(SamplePrior, CustomWidths) {
    const auto spec = HyperparamSpec::nonseparable(2, 1, 1);
    const PriorSpec prior = default_prior(spec, PriorWidths{10.0, 3.0});
    EXPECT_NEAR(prior.stddev()[0], std::log(10.0) / kNormalQuantile995, 1e-15);
    EXPECT_NEAR(prior.stddev()[1], 3.0 / kNormalQuantile995, 1e-15);
    EXPECT_EQ(prior.size(), parameter_count(spec));
    EXPECT_NO_THROW(check_prior(prior, spec));
    EXPECT_THROW(check_prior(prior, HyperparamSpec::nonseparable(3, 1, 1)), DimensionMismatch);
}

TEST(PriorLogpdf, ZeroIsSumOfNormalizers) {
    const auto spec = HyperparamSpec::nonseparable(2, 1, 2);
    const PriorSpec prior = default_prior(spec);
    const Vector s = prior.stddev();
    double expected = 0.0;
    for (Index i = 0; i < s.size(); ++i) expected += -std::log(s[i]) - 0.5 * std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(prior_logpdf(prior, Vector::Zero(s.size())), expected, 1e-12);
}

TEST(PriorLogpdf, GaussianIdentity) {
    const auto spec = HyperparamSpec::separable(3, 2, 2, 1);
    const PriorSpec prior = default_prior(spec);
    Rng rng = make_stream(5);
    const Vector s = prior.stddev();
    for (int trial = 0; trial < 20; ++trial) {
        const Vector u = sample_prior(prior, spec, rng);
        const double expected = -0.5 * u.cwiseQuotient(s).squaredNorm();
        EXPECT_NEAR(prior_logpdf(prior, u) - prior_logpdf(prior, Vector::Zero(u.size())), expected, 1e-9);
    }
}

TEST(PriorLogpdf, NormalizesInOneDimension) {
    PriorSpec prior;
    prior.groups.push_back(PriorGroup{"x", PriorTag::gaussian, Vector::Constant(1, 0.3), Vector::Constant(1, 1.7)});
    // Composite Simpson on [mean - 12 sd, mean + 12 sd].
    const int n = 4000;
    const double a = 0.3 - 12 * 1.7, b = 0.3 + 12 * 1.7, h = (b - a) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * std::exp(prior_logpdf(prior, Vector::Constant(1, a + i * h)));
    }
    EXPECT_NEAR(sum * h / 3.0, 1.0, 1e-6);
}

TEST(PriorJson, RoundTrip) {
    const auto spec = HyperparamSpec::separable(2, 3, 1, 2);
    const PriorSpec prior = default_prior(spec, PriorWidths{50.0, 7.0});
    const PriorSpec back = prior_from_json(prior_to_json(prior));
    ASSERT_EQ(back.groups.size(), prior.groups.size());
    EXPECT_EQ(back.mean(), prior.mean());
    EXPECT_EQ(back.stddev(), prior.stddev());
    EXPECT_EQ(back.tags(), prior.tags());
}

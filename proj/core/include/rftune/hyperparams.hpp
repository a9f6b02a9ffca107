#pragma once

// Packing between the constrained feature-distribution parameters and the
// unconstrained vector the ensemble optimizer works on.
//
// Layout (frozen):
//   nonseparable: [log scale | vec(U), column-major, dp x r | log S (r)]
//   separable:    [log scale | vec(V_in), d x r_in | log T_in | vec(V_out), p x r_out | log T_out]

#include "rftune/common.hpp"
#include "rftune/feature_models.hpp"
#include "rftune/random.hpp"

#include <string>
#include <vector>

namespace rftune {

struct HyperparamSpec {
    int input_dim = 1;
    int output_dim = 1;
    FeatureKind kind = FeatureKind::nonseparable;
    int rank = 1;
    int rank_in = 1;
    int rank_out = 1;

    static HyperparamSpec nonseparable(int d, int p, int r);
    static HyperparamSpec separable(int d, int p, int r_in, int r_out);

    void validate() const;
};

/// Number of tunable parameters q with diagonal S, T_in, T_out: r(dp + 1) + 1, or
/// r_in(d + 1) + r_out(p + 1) + 1.
int parameter_count(const HyperparamSpec& spec);

FeatureDistribution constrain(const Vector& u, const HyperparamSpec& spec);
Vector unconstrain(const FeatureDistribution& dist, const HyperparamSpec& spec);

enum class PriorTag { lognormal, gaussian };

/// One group of coordinates sharing a distribution family. For lognormal groups the
/// stored mean/std are the log-mean and log-std, i.e. the Gaussian law of the
/// unconstrained coordinate.
struct PriorGroup {
    std::string name;
    PriorTag tag = PriorTag::gaussian;
    Vector mean;
    Vector stddev;
};

struct PriorSpec {
    FeatureKind kind = FeatureKind::nonseparable;
    std::vector<PriorGroup> groups;

    Index size() const;
    Vector mean() const;
    Vector stddev() const;
    std::vector<PriorTag> tags() const;
};

/// Standard normal 0.995 quantile, used to turn 99% intervals into standard deviations.
inline constexpr double kNormalQuantile995 = 2.5758293035489004;

struct PriorWidths {
    /// Positive parameters: 99% of mass on (1/positive_span, positive_span).
    double positive_span = 1e3;
    /// Matrix entries: 99% of mass on (-matrix_span, matrix_span).
    double matrix_span = 300.0;
};

PriorSpec default_prior(const HyperparamSpec& spec, const PriorWidths& widths = {});
void check_prior(const PriorSpec& prior, const HyperparamSpec& spec);

Vector sample_prior(const PriorSpec& prior, const HyperparamSpec& spec, Rng& rng);
double prior_logpdf(const PriorSpec& prior, const Vector& u);

std::string prior_to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const std::string& text);

}  // namespace rftune

#include "rftune/hyperparams.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>

namespace rftune {

HyperparamSpec HyperparamSpec::nonseparable(int d, int p, int r) {
    HyperparamSpec s;
    s.input_dim = d;
    s.output_dim = p;
    s.kind = FeatureKind::nonseparable;
    s.rank = r;
    s.validate();
    return s;
}

HyperparamSpec HyperparamSpec::separable(int d, int p, int r_in, int r_out) {
    HyperparamSpec s;
    s.input_dim = d;
    s.output_dim = p;
    s.kind = FeatureKind::separable;
    s.rank_in = r_in;
    s.rank_out = r_out;
    s.validate();
    return s;
}

void HyperparamSpec::validate() const {
    if (input_dim < 1 || output_dim < 1) throw InvalidArgument("hyperparameter spec: dimensions must be positive");
    if (kind == FeatureKind::nonseparable) {
        if (rank < 1 || rank > input_dim * output_dim)
            throw InvalidRank("hyperparameter spec: rank must lie in [1, d p]");
    } else {
        if (rank_in < 1 || rank_in > input_dim) throw InvalidRank("hyperparameter spec: rank_in must lie in [1, d]");
        if (rank_out < 1 || rank_out > output_dim) throw InvalidRank("hyperparameter spec: rank_out must lie in [1, p]");
    }
}

int parameter_count(const HyperparamSpec& spec) {
    spec.validate();
    if (spec.kind == FeatureKind::nonseparable) return spec.rank * (spec.input_dim * spec.output_dim + 1) + 1;
    return spec.rank_in * (spec.input_dim + 1) + spec.rank_out * (spec.output_dim + 1) + 1;
}

namespace {

void check_length(const Vector& u, const HyperparamSpec& spec) {
    if (u.size() != parameter_count(spec))
        throw DimensionMismatch("hyperparameter vector has length " + std::to_string(u.size()) + ", expected " +
                                std::to_string(parameter_count(spec)));
}

// Reads a rows x cols block stored column-major starting at `offset`.
Matrix read_block(const Vector& u, Index& offset, Index rows, Index cols) {
    Matrix m = Eigen::Map<const Matrix>(u.data() + offset, rows, cols);
    offset += rows * cols;
    return m;
}

Vector read_exp(const Vector& u, Index& offset, Index n) {
    Vector v = u.segment(offset, n).array().exp();
    offset += n;
    return v;
}

void write_block(Vector& u, Index& offset, const Matrix& m) {
    Eigen::Map<Matrix>(u.data() + offset, m.rows(), m.cols()) = m;
    offset += m.size();
}

void write_log(Vector& u, Index& offset, const Vector& v, const char* what) {
    if ((v.array() <= 0.0).any()) throw NonpositiveParameter(std::string("unconstrain: ") + what + " must be positive");
    u.segment(offset, v.size()) = v.array().log();
    offset += v.size();
}

}  // namespace

FeatureDistribution constrain(const Vector& u, const HyperparamSpec& spec) {
    check_length(u, spec);
    FeatureDistribution dist;
    dist.kind = spec.kind;
    dist.input_dim = spec.input_dim;
    dist.output_dim = spec.output_dim;
    dist.scale = std::exp(u[0]);
    Index offset = 1;
    if (spec.kind == FeatureKind::nonseparable) {
        const Index dp = static_cast<Index>(spec.input_dim) * spec.output_dim;
        dist.U = read_block(u, offset, dp, spec.rank);
        dist.S = read_exp(u, offset, spec.rank);
    } else {
        dist.V_in = read_block(u, offset, spec.input_dim, spec.rank_in);
        dist.T_in = read_exp(u, offset, spec.rank_in);
        dist.V_out = read_block(u, offset, spec.output_dim, spec.rank_out);
        dist.T_out = read_exp(u, offset, spec.rank_out);
    }
    return dist;
}

Vector unconstrain(const FeatureDistribution& dist, const HyperparamSpec& spec) {
    spec.validate();
    if (dist.kind != spec.kind || dist.input_dim != spec.input_dim || dist.output_dim != spec.output_dim)
        throw DimensionMismatch("unconstrain: distribution does not match spec");
    if (!(dist.scale > 0.0)) throw NonpositiveParameter("unconstrain: scale must be positive");
    Vector u(parameter_count(spec));
    u[0] = std::log(dist.scale);
    Index offset = 1;
    if (spec.kind == FeatureKind::nonseparable) {
        if (dist.U.cols() != spec.rank || dist.S.size() != spec.rank)
            throw DimensionMismatch("unconstrain: rank does not match spec");
        write_block(u, offset, dist.U);
        write_log(u, offset, dist.S, "S");
    } else {
        if (dist.V_in.cols() != spec.rank_in || dist.V_out.cols() != spec.rank_out)
            throw DimensionMismatch("unconstrain: ranks do not match spec");
        write_block(u, offset, dist.V_in);
        write_log(u, offset, dist.T_in, "T_in");
        write_block(u, offset, dist.V_out);
        write_log(u, offset, dist.T_out, "T_out");
    }
    dist.validate();
    return u;
}

Index PriorSpec::size() const {
    Index n = 0;
    for (const auto& g : groups) n += g.mean.size();
    return n;
}

Vector PriorSpec::mean() const {
    Vector m(size());
    Index k = 0;
    for (const auto& g : groups) {
        m.segment(k, g.mean.size()) = g.mean;
        k += g.mean.size();
    }
    return m;
}

Vector PriorSpec::stddev() const {
    Vector s(size());
    Index k = 0;
    for (const auto& g : groups) {
        s.segment(k, g.stddev.size()) = g.stddev;
        k += g.stddev.size();
    }
    return s;
}

std::vector<PriorTag> PriorSpec::tags() const {
    std::vector<PriorTag> t;
    for (const auto& g : groups) t.insert(t.end(), static_cast<std::size_t>(g.mean.size()), g.tag);
    return t;
}

PriorSpec default_prior(const HyperparamSpec& spec, const PriorWidths& widths) {
    spec.validate();
    if (!(widths.positive_span > 1.0) || !(widths.matrix_span > 0.0))
        throw InvalidArgument("default_prior: spans must be positive (positive_span > 1)");
    const double log_std = std::log(widths.positive_span) / kNormalQuantile995;
    const double matrix_std = widths.matrix_span / kNormalQuantile995;
    auto positive = [&](std::string name, Index n) {
        return PriorGroup{std::move(name), PriorTag::lognormal, Vector::Zero(n), Vector::Constant(n, log_std)};
    };
    auto free = [&](std::string name, Index n) {
        return PriorGroup{std::move(name), PriorTag::gaussian, Vector::Zero(n), Vector::Constant(n, matrix_std)};
    };
    PriorSpec prior;
    prior.kind = spec.kind;
    prior.groups.push_back(positive("scale", 1));
    if (spec.kind == FeatureKind::nonseparable) {
        prior.groups.push_back(free("U", static_cast<Index>(spec.input_dim) * spec.output_dim * spec.rank));
        prior.groups.push_back(positive("S", spec.rank));
    } else {
        prior.groups.push_back(free("V_in", static_cast<Index>(spec.input_dim) * spec.rank_in));
        prior.groups.push_back(positive("T_in", spec.rank_in));
        prior.groups.push_back(free("V_out", static_cast<Index>(spec.output_dim) * spec.rank_out));
        prior.groups.push_back(positive("T_out", spec.rank_out));
    }
    return prior;
}

void check_prior(const PriorSpec& prior, const HyperparamSpec& spec) {
    if (prior.kind != spec.kind || prior.size() != parameter_count(spec))
        throw DimensionMismatch("prior does not match the hyperparameter layout");
    for (const auto& g : prior.groups) {
        if (g.mean.size() != g.stddev.size()) throw DimensionMismatch("prior group '" + g.name + "' mean/std mismatch");
        if ((g.stddev.array() <= 0.0).any()) throw InvalidArgument("prior group '" + g.name + "' has nonpositive std");
    }
}

Vector sample_prior(const PriorSpec& prior, const HyperparamSpec& spec, Rng& rng) {
    check_prior(prior, spec);
    const Vector z = standard_normal(rng, prior.size());
    return prior.mean() + prior.stddev().cwiseProduct(z);
}

double prior_logpdf(const PriorSpec& prior, const Vector& u) {
    if (u.size() != prior.size()) throw DimensionMismatch("prior_logpdf: length mismatch");
    const Vector m = prior.mean();
    const Vector s = prior.stddev();
    const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi);
    double total = 0.0;
    for (Index i = 0; i < u.size(); ++i) {
        const double z = (u[i] - m[i]) / s[i];
        total += -0.5 * z * z - std::log(s[i]) - log_norm;
    }
    return total;
}

namespace {

const char* kind_name(FeatureKind k) { return k == FeatureKind::nonseparable ? "nonseparable" : "separable"; }

FeatureKind kind_from(const std::string& s) {
    if (s == "nonseparable") return FeatureKind::nonseparable;
    if (s == "separable") return FeatureKind::separable;
    throw InvalidArgument("unknown feature kind '" + s + "'");
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

}  // namespace

std::string prior_to_json(const PriorSpec& prior) {
    nlohmann::json j;
    j["kind"] = kind_name(prior.kind);
    j["groups"] = nlohmann::json::array();
    for (const auto& g : prior.groups) {
        j["groups"].push_back({{"name", g.name},
                               {"distribution", g.tag == PriorTag::lognormal ? "lognormal" : "gaussian"},
                               {"mean", to_std(g.mean)},
                               {"std", to_std(g.stddev)}});
    }
    return j.dump(2);
}

PriorSpec prior_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        PriorSpec prior;
        prior.kind = kind_from(j.at("kind").get<std::string>());
        for (const auto& g : j.at("groups")) {
            PriorGroup group;
            group.name = g.at("name").get<std::string>();
            const auto dist = g.at("distribution").get<std::string>();
            if (dist == "lognormal")
                group.tag = PriorTag::lognormal;
            else if (dist == "gaussian")
                group.tag = PriorTag::gaussian;
            else
                throw InvalidArgument("unknown prior distribution '" + dist + "'");
            group.mean = from_std(g.at("mean").get<std::vector<double>>());
            group.stddev = from_std(g.at("std").get<std::vector<double>>());
            prior.groups.push_back(std::move(group));
        }
        return prior;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("prior JSON: ") + e.what());
    }
}

}  // namespace rftune

#include "rftune/serialization.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace rftune {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from(const json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Index>(data.size()) != rows * cols) throw InvalidArgument("matrix payload has the wrong size");
    return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
}

json features_json(const FeatureSet& fs) {
    return {{"scale", fs.scale},
            {"input_dim", fs.input_dim},
            {"output_dim", fs.output_dim},
            {"count", fs.count()},
            {"frequencies", matrix_json(fs.frequencies)},
            {"phases", vector_json(fs.phases)}};
}

FeatureSet features_from(const json& j) {
    FeatureSet fs;
    fs.scale = j.at("scale").get<double>();
    fs.input_dim = j.at("input_dim").get<int>();
    fs.output_dim = j.at("output_dim").get<int>();
    fs.frequencies = matrix_from(j.at("frequencies"));
    fs.phases = vector_from(j.at("phases"));
    fs.validate();
    return fs;
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed artifact: ") + e.what());
    }
}

}  // namespace

std::string feature_set_to_json(const FeatureSet& features) { return features_json(features).dump(); }

FeatureSet feature_set_from_json(const std::string& text) {
    return guarded([&] { return features_from(json::parse(text)); });
}

std::string fit_to_json(const RFFit& fit) {
    json j{{"features", features_json(fit.features)},
           {"beta", vector_json(fit.beta)},
           {"system", matrix_json(fit.system)},
           {"prior_mean", vector_json(fit.prior_mean)},
           {"noise", matrix_json(fit.noise.covariance())},
           {"n_train", fit.n_train},
           {"jitter", fit.jitter}};
    return j.dump();
}

RFFit fit_from_json(const std::string& text) {
    return guarded([&] {
        const json j = json::parse(text);
        RFFit f;
        f.features = features_from(j.at("features"));
        f.beta = vector_from(j.at("beta"));
        f.system = matrix_from(j.at("system"));
        f.prior_mean = vector_from(j.at("prior_mean"));
        f.noise = NoiseModel(matrix_from(j.at("noise")));
        f.n_train = j.at("n_train").get<Index>();
        f.jitter = j.at("jitter").get<double>();
        if (f.beta.size() != f.features.count() || f.system.rows() != f.features.count())
            throw InvalidArgument("fit artifact: coefficient size does not match the feature count");
        refactor(f);
        return f;
    });
}

std::string distribution_to_json(const FeatureDistribution& d) {
    json j{{"kind", d.kind == FeatureKind::nonseparable ? "nonseparable" : "separable"},
           {"input_dim", d.input_dim},
           {"output_dim", d.output_dim},
           {"scale", d.scale}};
    if (d.kind == FeatureKind::nonseparable) {
        j["U"] = matrix_json(d.U);
        j["S"] = vector_json(d.S);
    } else {
        j["V_in"] = matrix_json(d.V_in);
        j["T_in"] = vector_json(d.T_in);
        j["V_out"] = matrix_json(d.V_out);
        j["T_out"] = vector_json(d.T_out);
    }
    return j.dump();
}

FeatureDistribution distribution_from_json(const std::string& text) {
    return guarded([&] {
        const json j = json::parse(text);
        FeatureDistribution d;
        const auto kind = j.at("kind").get<std::string>();
        if (kind != "nonseparable" && kind != "separable") throw InvalidArgument("unknown feature kind '" + kind + "'");
        d.kind = kind == "nonseparable" ? FeatureKind::nonseparable : FeatureKind::separable;
        d.input_dim = j.at("input_dim").get<int>();
        d.output_dim = j.at("output_dim").get<int>();
        d.scale = j.at("scale").get<double>();
        if (d.kind == FeatureKind::nonseparable) {
            d.U = matrix_from(j.at("U"));
            d.S = vector_from(j.at("S"));
        } else {
            d.V_in = matrix_from(j.at("V_in"));
            d.T_in = vector_from(j.at("T_in"));
            d.V_out = matrix_from(j.at("V_out"));
            d.T_out = vector_from(j.at("T_out"));
        }
        d.validate();
        return d;
    });
}

std::string transform_to_json(const DataTransform& t) {
    json j{{"input_mean", vector_json(t.input_mean)},
           {"input_scale", vector_json(t.input_scale)},
           {"output_mean", vector_json(t.output_mean)},
           {"output_whiten", matrix_json(t.output_whiten)},
           {"output_unwhiten", matrix_json(t.output_unwhiten)}};
    return j.dump();
}

DataTransform transform_from_json(const std::string& text) {
    return guarded([&] {
        const json j = json::parse(text);
        DataTransform t;
        t.input_mean = vector_from(j.at("input_mean"));
        t.input_scale = vector_from(j.at("input_scale"));
        t.output_mean = vector_from(j.at("output_mean"));
        t.output_whiten = matrix_from(j.at("output_whiten"));
        t.output_unwhiten = matrix_from(j.at("output_unwhiten"));
        return t;
    });
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoFailure("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace rftune

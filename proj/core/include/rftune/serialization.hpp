#pragma once

// JSON artifacts for feature sets and fitted regressors. Doubles are written in
// shortest round-trip form, so reloading is bit-exact.

#include "rftune/feature_models.hpp"
#include "rftune/rfr.hpp"
#include "rftune/tuning.hpp"

#include <filesystem>
#include <string>

namespace rftune {

std::string feature_set_to_json(const FeatureSet& features);
FeatureSet feature_set_from_json(const std::string& text);

std::string fit_to_json(const RFFit& fit);
RFFit fit_from_json(const std::string& text);

std::string distribution_to_json(const FeatureDistribution& dist);
FeatureDistribution distribution_from_json(const std::string& text);

std::string transform_to_json(const DataTransform& transform);
DataTransform transform_from_json(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rftune

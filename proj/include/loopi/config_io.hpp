#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "loopi/validation.hpp"

namespace loopi {

// Raised for malformed or invalid experiment configs. The message carries the
// offending field (or the parse position for syntax errors).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const CovarianceSpec& spec);
nlohmann::json to_json(const LDist& dist);
nlohmann::json to_json(const VDist& dist);
nlohmann::json to_json(const UDist& dist);
nlohmann::json to_json(const DesignSpec& spec);
nlohmann::json to_json(const BetaSpec& spec);
nlohmann::json to_json(const EstimatorSpec& spec);
nlohmann::json to_json(const ExperimentConfig& config);

EstimatorSpec estimator_from_json(const nlohmann::json& j,
                                  const std::string& where);
DesignSpec design_from_json(const nlohmann::json& j, const std::string& where);
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig parse_config_file(const std::filesystem::path& path);

// FNV-1a over the canonical serialization; identifies a config in manifests.
std::string config_hash(const ExperimentConfig& config);

}  // namespace loopi

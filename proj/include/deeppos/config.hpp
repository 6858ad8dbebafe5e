#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "deeppos/synthetic_env.hpp"
#include "deeppos/trainer.hpp"

namespace deeppos {

/// A scenario file: environment, survey grid and (optionally) the network
/// and training settings used for it.
struct ScenarioConfig {
  std::string name;
  EnvironmentSpec environment;
  GridSettings grid;
  std::optional<TrainConfig> train;
};

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& source_name);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Reads a TrainConfig from either a scenario file's "train" block or a
/// file whose top level is the training block itself. Missing keys keep
/// their defaults.
TrainConfig parse_train_config(const std::string& json_text, const std::string& source_name);
TrainConfig load_train_config(const std::filesystem::path& path);

std::string train_config_to_json(const TrainConfig& cfg);

}  // namespace deeppos

#pragma once

#include <filesystem>
#include <string>

#include "deeppos/sae.hpp"

namespace deeppos {

inline constexpr int kModelFormatVersion = 1;

// JSON document; weights are row-major with shortest round-trip decimals, so
// a save/load cycle reproduces every double exactly.
std::string model_to_json(const SaeModel& model);
SaeModel model_from_json(const std::string& text, const std::string& source_name = "model");

void save_model(const SaeModel& model, const std::filesystem::path& path);
SaeModel load_model(const std::filesystem::path& path);

}  // namespace deeppos

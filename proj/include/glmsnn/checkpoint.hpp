#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "glmsnn/glm.hpp"

namespace glmsnn {

inline constexpr const char* kCheckpointFormat = "glmsnn-checkpoint";
inline constexpr int kCheckpointVersion = 1;

nlohmann::json basis_spec_to_json(const BasisSpec& spec);
BasisSpec basis_spec_from_json(const nlohmann::json& j);

/// Versioned JSON document holding dims, basis specs (explicit bases carry
/// their matrix) and every weight. Doubles are written with 17 significant
/// digits so a save/load cycle is lossless.
nlohmann::json model_to_json(const ModelParams& params);
ModelParams model_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace glmsnn

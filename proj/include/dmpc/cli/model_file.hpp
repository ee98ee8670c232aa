#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dmpc/domain.hpp"

namespace dmpc::cli {

inline constexpr std::string_view kModelFormat = "dmpc-models";
inline constexpr int kModelVersion = 1;

/// JSON: {"format": "dmpc-models", "version": 1,
///        "dl": {"intercept": .., "d_prev": .., ...},
///        "idt": {"k_up": .., "k_down": ..},
///        "ami": {"theta0": .., "theta_prev": .., "theta_set": ..}}
/// Numbers are written at full precision.
std::string emit_models(const ModelSet& models);

/// Throws Error(Schema) on malformed JSON, wrong format/version, missing or
/// unknown keys; the result is validated.
ModelSet parse_models(std::string_view text);

ModelSet load_models(const std::filesystem::path& path);
void save_models(const std::filesystem::path& path, const ModelSet& models);

}  // namespace dmpc::cli

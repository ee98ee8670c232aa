#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dmpc/sim.hpp"

namespace dmpc::cli {

/// Parses the line-oriented scenario format:
///
///   # comment
///   [mpc]
///   temp_lo = 25.5
///   p_illum = 1/150
///
/// Sections: scenario, mpc, de, plant, plant.dl, plant.idt, plant.ami and
/// controller.dl / controller.idt / controller.ami (used when
/// scenario.model_mismatch is true). Keys are the struct field names.
/// Unknown sections or keys, duplicates and malformed values throw
/// Error(Schema) with "origin:line:" in the message; the parsed scenario is
/// then validated.
ScenarioConfig parse_config(std::string_view text, std::string_view origin = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Every field, full precision; parse_config(emit_config(c)) == c.
std::string emit_config(const ScenarioConfig& config);

}  // namespace dmpc::cli

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmpc::cli {

using Millis = std::chrono::sys_time<std::chrono::milliseconds>;

/// 6 significant digits, the CSV output precision.
std::string fmt6(double v);
/// 17 significant digits; parses back to the same double.
std::string fmt17(double v);

std::optional<double> parse_double(std::string_view text);
std::optional<std::uint64_t> parse_uint(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]; no zone means UTC.
std::optional<Millis> parse_iso8601(std::string_view text);
/// UTC with a Z suffix; milliseconds only when nonzero.
std::string format_iso8601(Millis t);

}  // namespace dmpc::cli

#pragma once

#include <iosfwd>
#include <string_view>

#include "dmpc/domain.hpp"
#include "dmpc/identify.hpp"

namespace dmpc::cli {

inline constexpr std::string_view kTelemetryHeader =
    "step,worker_id,dl,effort,temp_c,illum_lx,temp_set_c,illum_set_lx";

/// Header row mandatory, columns in the fixed order above. Throws
/// Error(Schema) naming origin and line on any malformed row. A file with
/// no data rows yields an empty table.
TelemetryTable read_telemetry(std::istream& in, std::string_view origin = "<telemetry>");
/// Full precision, so identification from a written file matches in-memory data.
void write_telemetry(std::ostream& out, const TelemetryTable& table);

inline constexpr std::string_view kSnapshotHeader = "worker_id,dl,dl_prev,effort,temp_c,illum_lx";

/// One row per worker; temp_c and illum_lx must agree across rows.
StateSnapshot read_snapshot(std::istream& in, std::string_view origin = "<snapshot>");

}  // namespace dmpc::cli

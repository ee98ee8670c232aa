#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "dmpc/cli/format.hpp"
#include "dmpc/sim.hpp"

namespace dmpc::cli {

/// Trace CSV: '#'-prefixed metadata lines (mode, seed, workers, comfort
/// parameters), a header row, then one row per step:
///   step,temp_set_c,illum_set_lx,temp_c,illum_lx,penalty,feasible,status,
///   occupied,dl_0..dl_{W-1},effort_0..effort_{W-1}
/// Step values use 6 significant digits; metadata is exact.
void write_trace(std::ostream& out, const SimTrace& trace);

/// Inverse of write_trace; write_trace(read_trace(x)) reproduces x byte for
/// byte. Throws Error(Schema) naming origin and line. Controller predictions
/// are not part of the file and come back NaN / empty.
SimTrace read_trace(std::istream& in, std::string_view origin = "<trace>");

inline constexpr std::string_view kMetricsHeader =
    "mode,seed,mean_dl,comfort_violation_rate,mean_abs_temp_dev,mean_abs_illum_dev,"
    "setpoint_change_count";

void write_metrics(std::ostream& out, const SimTrace& trace, const Metrics& metrics);

/// Instant samples as daemon input records, one JSON object per line, worker
/// i named "w<i>", sample k of step n stamped origin + (n + k / substeps) * tau.
void write_samples(std::ostream& out, const std::vector<InstantSample>& samples,
                   double step_hours, std::size_t substeps, Millis origin);

/// Fixed timestamp the simulator uses as the start of step 0.
Millis default_origin();

}  // namespace dmpc::cli

#pragma once

#include <cstddef>
#include <iosfwd>

#include "dmpc/domain.hpp"
#include "dmpc/optimizer.hpp"

namespace dmpc::cli {

struct DaemonStats {
  std::size_t records = 0;    // accepted input records
  std::size_t malformed = 0;  // skipped input lines
  std::size_t emitted = 0;    // setpoint records written
};

/// Streaming controller. Input: one JSON object per line with fields t
/// (ISO-8601), worker, dl, temp_c, illum_lx. Records are bucketed into
/// windows of cfg.step_hours counted from the first record's time; workers
/// are numbered in order of first appearance. When a window closes (a later
/// window's record arrives, or the input ends) one output record
///   {"t", "temp_set_c", "illum_set_lx", "feasible", "status"}
/// is written, stamped with the end of the window. Windows with a missing
/// worker, or skipped entirely, emit the held setpoints with status "stale".
/// Lines that are not valid records, belong to an earlier window or name a
/// worker beyond cfg.num_workers are skipped and counted.
DaemonStats run_daemon(const ModelSet& models, const MpcConfig& cfg, const DeParams& de,
                       std::istream& in, std::ostream& out);

}  // namespace dmpc::cli

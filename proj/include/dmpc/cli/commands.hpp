#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dmpc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitInsufficientData = 3,
  kExitInfeasible = 4,
};

enum class OutputFormat { Csv, Text };

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> model;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  /// Unset: csv for solve, text elsewhere.
  std::optional<OutputFormat> format;
};

/// Fits all three models and writes them to --model (default
/// <out-dir>/model.json).
int cmd_identify(const std::filesystem::path& telemetry, const CommonOptions& opt,
                 std::ostream& out, std::ostream& err);

/// One-shot solve on a snapshot CSV; prints the schedule as CSV.
int cmd_solve(const std::filesystem::path& snapshot, const CommonOptions& opt, std::ostream& out,
              std::ostream& err);

/// Closed-loop run; writes trace.csv, metrics.csv, telemetry.csv,
/// samples.jsonl and controller_model.json into --out-dir. `mode` overrides
/// the configured control mode.
int cmd_simulate(const CommonOptions& opt, const std::optional<std::string>& mode,
                 std::ostream& out, std::ostream& err);

/// Per-arm comparison of trace files.
int cmd_report(const std::vector<std::filesystem::path>& traces, const CommonOptions& opt,
               std::ostream& out, std::ostream& err);

int cmd_daemon(const CommonOptions& opt, std::istream& in, std::ostream& out, std::ostream& err);

/// Entry point of the dmpc executable.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace dmpc::cli

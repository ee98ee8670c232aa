#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dmpc/detail/rollout_core.hpp"
#include "dmpc/domain.hpp"
#include "dmpc/identify.hpp"
#include "dmpc/mpc.hpp"
#include "dmpc/optimizer.hpp"

namespace dmpc {

/// Ground-truth room and occupants. The plants use the same parametric
/// families as the prediction models, so a controller holding `truth` is a
/// perfect-model controller up to noise, drift and ambient pull.
struct PlantConfig {
  ModelSet truth;
  double temp_disturbance_sd = 0.05;   // degC per step
  double illum_disturbance_sd = 5.0;   // lux per step
  double dl_noise_sd = 0.05;           // per-step DL shock
  double instant_sd = 0.1;             // spread of instant DL within a step
  std::size_t substeps = 4;            // instant DL samples per step
  std::vector<double> drift;           // additive DL pressure, cycled by step
  double ambient_pull = 0.0;           // fraction of the gap to ambient_temp closed per step
  double ambient_temp = 30.0;          // degC

  void validate() const;
  [[nodiscard]] double drift_at(std::int64_t step) const;
};

/// Plant used by the shipped scenarios: cooling steps and brightening
/// steps lower drowsiness, warming and dimming raise it.
ModelSet reference_models();

/// Afternoon drowsiness pressure for a `steps`-long working day: zero in the
/// morning, a bump over the first two hours after lunch.
std::vector<double> reference_drift(std::size_t steps, std::size_t lunch_start,
                                    std::size_t lunch_steps);

enum class NoiseChannel : std::uint32_t { Environment = 1, Drowsiness = 2, Excitation = 3 };

/// Common-random-numbers source: each (channel, step, worker) gets its own
/// generator derived from the scenario seed, so noise never depends on what
/// the controller did.
class NoiseStreams {
 public:
  explicit NoiseStreams(std::uint64_t seed) : seed_(seed) {}
  [[nodiscard]] std::mt19937_64 stream(NoiseChannel channel, std::int64_t step,
                                       std::size_t worker) const;

 private:
  std::uint64_t seed_;
};

struct PlantState {
  double temp = 0.0;
  double illum = 0.0;
  std::vector<double> dl;       // time-averaged DL of the current step
  std::vector<double> dl_prev;  // of the step before
  std::vector<double> effort;   // SD of instant DL in the current step
};

struct PlantStepOutput {
  PlantState next;
  std::vector<std::vector<double>> instants;  // [worker][substep]
};

/// Advances the room by one step under `setpoints`. `step` is the index of
/// the step being produced and keys the noise streams. Unoccupied steps
/// freeze the workers.
PlantStepOutput plant_step(const PlantConfig& plant, const PlantState& state,
                           const Setpoints& setpoints, std::int64_t step,
                           const NoiseStreams& noise, bool occupied = true);

struct ScenarioConfig {
  std::size_t steps = 28;
  std::uint64_t seed = 1;
  MpcConfig mpc = case1_config();
  DeParams de;
  PlantConfig plant;
  /// When set, the controller predicts with `controller_models` instead of
  /// the plant truth.
  bool model_mismatch = false;
  ModelSet controller_models;
  std::optional<double> initial_temp;   // defaults to the comfort temperature
  std::optional<double> initial_illum;  // defaults to the comfort illuminance
  std::vector<double> initial_dl{2.0};  // one value per worker, or one for all
  std::optional<std::size_t> lunch_start;
  std::size_t lunch_steps = 4;
  /// Open-loop identification run: setpoints drawn uniformly within bounds.
  bool excitation = false;

  [[nodiscard]] ControlMode mode() const noexcept { return mpc.mode; }
  [[nodiscard]] bool occupied(std::int64_t step) const;
  void validate() const;
};

struct TraceStep {
  std::int64_t step = 0;
  double temp_set = 0.0;
  double illum_set = 0.0;
  double temp = 0.0;
  double illum = 0.0;
  double penalty = 0.0;
  bool feasible = true;
  bool stale = false;
  bool occupied = true;
  std::vector<double> dl;
  std::vector<double> effort;
  // Controller's step-1 prediction for this step; NaN when nothing was solved.
  double predicted_temp = std::numeric_limits<double>::quiet_NaN();
  double predicted_illum = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> predicted_dl;
};

struct SimTrace {
  ControlMode mode = ControlMode::NOC;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  detail::ComfortParams comfort{};
  std::vector<TraceStep> steps;
};

struct Metrics {
  double mean_dl = 0.0;
  double comfort_violation_rate = 0.0;
  double mean_abs_temp_dev = 0.0;
  double mean_abs_illum_dev = 0.0;
  std::size_t setpoint_change_count = 0;
};

/// mean_dl over occupied steps; the rest over all steps.
Metrics compute_metrics(const SimTrace& trace);

/// One instant observation as an edge device would send it.
struct InstantSample {
  std::int64_t step = 0;
  std::size_t substep = 0;
  std::size_t worker = 0;
  double dl = 0.0;
  double temp = 0.0;
  double illum = 0.0;
};

struct SimResult {
  SimTrace trace;
  Metrics metrics;
  /// Instant samples of steps 0..steps-1 in the order the controller saw
  /// them; replaying them through the daemon reproduces the setpoints.
  std::vector<InstantSample> samples;
  /// Per-step, per-worker telemetry of occupied steps (identification input).
  TelemetryTable telemetry;
};

SimResult run_scenario(const ScenarioConfig& sc);

struct ArmSpec {
  std::string label;
  ControlMode mode;
};

std::vector<ArmSpec> default_arms();

struct ArmSummary {
  ArmSpec arm;
  std::vector<Metrics> per_seed;
  double mean_dl = 0.0;
  double comfort_violation_rate = 0.0;
  double mean_abs_temp_dev = 0.0;
  double mean_abs_illum_dev = 0.0;
  double setpoint_change_count = 0.0;
};

struct ArmComparison {
  std::vector<std::uint64_t> seeds;
  std::vector<ArmSummary> arms;

  /// Per-seed mean_dl(arm a) - mean_dl(arm b).
  [[nodiscard]] std::vector<double> paired_dl_delta(std::size_t a, std::size_t b) const;
};

/// Runs every arm on every seed with shared noise streams. Runs execute
/// concurrently on up to `threads` workers (0 = hardware concurrency).
ArmComparison compare_arms(const ScenarioConfig& base, const std::vector<std::uint64_t>& seeds,
                           const std::vector<ArmSpec>& arms = default_arms(),
                           unsigned threads = 0);

}  // namespace dmpc

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dmpc/domain.hpp"
#include "dmpc/models.hpp"
#include "dmpc/optimizer.hpp"

namespace dmpc {

struct Setpoints {
  double temp = 0.0;   // degC
  double illum = 0.0;  // lux

  friend bool operator==(const Setpoints&, const Setpoints&) = default;
};

struct MpcSolution {
  ControlSchedule schedule;
  HorizonPrediction predicted;
  double objective_value = 0.0;
  double violation = 0.0;
  bool feasible = false;
  Setpoints applied;
  std::size_t generations_used = 0;
};

/// Signature of the minimizer used by solve(); injectable so tests can
/// count or replace optimizer calls.
using Minimizer = std::function<DeResult(const BatchEvaluator&, std::span<const double>,
                                         std::span<const double>, const DeParams&)>;

Minimizer default_minimizer();

/// One horizon solve. NOC returns the constant comfort schedule without
/// touching the optimizer; MPC1 optimizes temperatures with illuminance
/// pinned at the comfort value; MPC2 optimizes all 2H setpoints.
/// Feasibility is re-checked on the final prediction. An infeasible result
/// is returned (feasible = false, least-violating schedule), not thrown.
MpcSolution solve(const ModelSet& models, const StateSnapshot& snapshot, const MpcConfig& cfg,
                  const DeParams& de, const Minimizer& minimizer = default_minimizer());

/// Time-averaged measurements of one completed step.
struct StepMeasurement {
  std::int64_t step = 0;
  double temp = 0.0;
  double illum = 0.0;
  std::vector<double> dl;      // per worker, mean of instant samples
  std::vector<double> effort;  // per worker, SD of instant samples
};

/// Mean and population standard deviation; SD is 0 for a single sample.
struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};
MeanSd mean_and_sd(std::span<const double> samples);

/// Collects the instant samples of one step (in arrival order) and reduces
/// them to a StepMeasurement. Shared by the simulator and the daemon so both
/// produce identical measurements from identical sample streams.
class StepAggregator {
 public:
  explicit StepAggregator(std::size_t num_workers);

  void add(std::size_t worker, double dl, double temp, double illum);
  [[nodiscard]] bool empty() const noexcept { return temps_.empty(); }
  /// True when every worker has contributed at least one sample.
  [[nodiscard]] bool complete() const noexcept;
  /// Reduces and resets. Workers without samples get dl = NaN.
  StepMeasurement finish(std::int64_t step);

 private:
  std::vector<std::vector<double>> dl_;
  std::vector<double> temps_;
  std::vector<double> illums_;
};

enum class ControllerStatus { Ok, Stale };

struct ControllerOutput {
  ControllerStatus status = ControllerStatus::Ok;
  Setpoints setpoints;
  bool feasible = true;
  std::optional<MpcSolution> solution;
};

/// Receding-horizon controller. Each step() re-solves from the latest
/// measurement with DE seed base_seed + clock and emits the first step of
/// the schedule. Holds the previous setpoints when the latest measurement is
/// not for `clock` (StaleData).
class Controller {
 public:
  Controller(ModelSet models, MpcConfig cfg, DeParams de,
             Minimizer minimizer = default_minimizer());

  void observe(StepMeasurement m);
  ControllerOutput step(std::int64_t clock);

  /// Snapshot built from the last two measurements. With a single (or
  /// non-consecutive) previous step the DL increments are zero.
  [[nodiscard]] StateSnapshot snapshot() const;
  [[nodiscard]] const Setpoints& held() const noexcept { return held_; }
  [[nodiscard]] const MpcConfig& config() const noexcept { return cfg_; }

 private:
  ModelSet models_;
  MpcConfig cfg_;
  DeParams de_;
  Minimizer minimizer_;
  std::deque<StepMeasurement> history_;
  Setpoints held_;
};

}  // namespace dmpc

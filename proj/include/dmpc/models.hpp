#pragma once

#include <cstddef>
#include <vector>

#include "dmpc/domain.hpp"

namespace dmpc {

struct Increments {
  double plus = 0.0;
  double minus = 0.0;
};

/// plus = max(x - prev, 0), minus = max(prev - x, 0).
Increments increments(double x, double prev);

/// One step of the first-order lag; k_up when setpoint >= temp_prev.
double predict_idt(const IdtModel& m, double temp_prev, double setpoint);

/// One step of the illuminance regression, floored at 0 lux.
double predict_ami(const AmiModel& m, double illum_prev, double setpoint);

/// Regressors of the drowsiness model at step t. The DL increments are the
/// lagged ones (t-1); temperature and illuminance increments are current.
struct DlFeatures {
  double d_prev = 0.0;
  double d_plus_prev = 0.0;
  double d_minus_prev = 0.0;
  double temp = 0.0;
  double temp_plus = 0.0;
  double temp_minus = 0.0;
  double illum = 0.0;
  double illum_plus = 0.0;
  double illum_minus = 0.0;
  double effort = 0.0;
};

/// Raw regression value before clamping to the DL scale.
double dl_regression(const DlModel& m, const DlFeatures& x);

/// Regression value clamped to [1, 5].
DrowsinessLevel predict_dl(const DlModel& m, const DlFeatures& x);

/// Predicted trajectory over one horizon.
struct HorizonPrediction {
  std::size_t workers = 0;
  std::size_t horizon = 0;
  std::vector<double> temps;   // T_1..T_H
  std::vector<double> illums;  // L_1..L_H
  std::vector<double> dls;     // row-major workers x horizon, each in [1, 5]

  [[nodiscard]] double dl(std::size_t worker, std::size_t t) const {
    return dls[worker * horizon + t];
  }
};

/// Chains the three models from the snapshot over the schedule. DL
/// increments at step 1 come from the snapshot, afterwards from the model's
/// own (clamped) predictions; effort stays at its step-0 value.
/// Throws ShapeMismatch when the schedule or snapshot disagree with cfg.
HorizonPrediction rollout(const ModelSet& models, const StateSnapshot& snapshot,
                          const ControlSchedule& schedule, const MpcConfig& cfg);

/// Mean predicted DL over workers and steps.
double objective(const HorizonPrediction& pred);

/// p_T |T - T_c| + p_L |L - L_c|.
double comfort_penalty(double temp, double illum, const MpcConfig& cfg);

/// Sum over steps of max(penalty - cap, 0); zero iff every step is within the cap.
double constraint_violation(const HorizonPrediction& pred, const MpcConfig& cfg);

}  // namespace dmpc

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmpc/error.hpp"

namespace dmpc {

inline constexpr double kDlMin = 1.0;
inline constexpr double kDlMax = 5.0;

/// Drowsiness on the 1 (fully awake) .. 5 (extremely drowsy) scale.
class DrowsinessLevel {
 public:
  /// Throws InvalidValue outside [1, 5].
  explicit DrowsinessLevel(double value);
  static DrowsinessLevel clamped(double raw);

  [[nodiscard]] double value() const noexcept { return value_; }
  friend bool operator==(DrowsinessLevel, DrowsinessLevel) = default;

 private:
  double value_;
};

/// Per-worker state at the start of a horizon (step 0).
struct WorkerState {
  DrowsinessLevel d_current{kDlMin};
  double d_plus = 0.0;   // max(D_0 - D_-1, 0)
  double d_minus = 0.0;  // max(D_-1 - D_0, 0)
  double effort = 0.0;   // SD of instant DL within step 0

  /// Builds the increments from the last two measured levels.
  static WorkerState from_history(double d_current, double d_previous, double effort);
  void validate() const;
};

struct StateSnapshot {
  std::vector<WorkerState> workers;
  double temp_current = 0.0;   // degC, time-averaged over step 0
  double illum_current = 0.0;  // lux, time-averaged over step 0

  void validate() const;
};

/// Decision vector of one horizon: temperature setpoints then illuminance
/// setpoints, each of length `horizon()`.
class ControlSchedule {
 public:
  ControlSchedule(std::vector<double> temp_setpoints, std::vector<double> illum_setpoints);
  static ControlSchedule constant(std::size_t horizon, double temp, double illum);
  /// Inverse of flatten(); `flat.size()` must be even and nonzero.
  static ControlSchedule unflatten(std::span<const double> flat);

  [[nodiscard]] std::size_t horizon() const noexcept { return temps_.size(); }
  [[nodiscard]] const std::vector<double>& temp_setpoints() const noexcept { return temps_; }
  [[nodiscard]] const std::vector<double>& illum_setpoints() const noexcept { return illums_; }
  [[nodiscard]] std::vector<double> flatten() const;

  friend bool operator==(const ControlSchedule&, const ControlSchedule&) = default;

 private:
  std::vector<double> temps_;
  std::vector<double> illums_;
};

enum class ControlMode { NOC, MPC1, MPC2 };

std::string_view to_string(ControlMode mode);
std::optional<ControlMode> parse_control_mode(std::string_view text);

struct MpcConfig {
  std::size_t horizon = 4;
  double step_hours = 0.25;
  std::size_t num_workers = 5;
  double temp_lo = 25.5;
  double temp_hi = 26.5;
  double illum_lo = 450.0;
  double illum_hi = 750.0;
  double temp_comfort = 26.0;
  double illum_comfort = 600.0;
  double p_temp = 0.5;           // per degC
  double p_illum = 1.0 / 150.0;  // per lux
  double penalty_cap = 2.0;
  ControlMode mode = ControlMode::MPC2;
};

/// Office trial presets: Case 1 has five workers and a 25.5..26.5 degC band,
/// Case 2 six workers and 25.0..27.0 degC. Everything else is shared.
MpcConfig case1_config(ControlMode mode = ControlMode::MPC2);
MpcConfig case2_config(ControlMode mode = ControlMode::MPC2);

/// Throws BoundsInverted, ComfortOutsideBounds, NonPositiveCoefficient or
/// InvalidValue naming the offending field.
void validate_config(const MpcConfig& cfg);

enum class DlFeature : std::size_t {
  DPrev,
  DPlusPrev,
  DMinusPrev,
  Temp,
  TempPlus,
  TempMinus,
  Illum,
  IllumPlus,
  IllumMinus,
  Effort,
};

inline constexpr std::size_t kDlFeatureCount = 10;

inline constexpr std::array<std::string_view, kDlFeatureCount> kDlFeatureNames = {
    "d_prev", "d_plus_prev", "d_minus_prev", "temp",        "temp_plus",
    "temp_minus", "illum",   "illum_plus",   "illum_minus", "effort"};

std::optional<DlFeature> parse_dl_feature(std::string_view name);

/// Linear drowsiness regression.
struct DlModel {
  double intercept = 0.0;
  std::array<double, kDlFeatureCount> coef{};

  [[nodiscard]] double& operator[](DlFeature f) { return coef[static_cast<std::size_t>(f)]; }
  [[nodiscard]] double operator[](DlFeature f) const { return coef[static_cast<std::size_t>(f)]; }
  void validate() const;
  friend bool operator==(const DlModel&, const DlModel&) = default;
};

/// Asymmetric first-order lag of room temperature towards the setpoint.
struct IdtModel {
  double k_up = 1.0;
  double k_down = 1.0;

  void validate() const;
  friend bool operator==(const IdtModel&, const IdtModel&) = default;
};

/// Illuminance: theta0 + theta_prev * L_prev + theta_set * L_set.
struct AmiModel {
  double theta0 = 0.0;
  double theta_prev = 0.0;
  double theta_set = 1.0;

  void validate() const;
  friend bool operator==(const AmiModel&, const AmiModel&) = default;
};

struct ModelSet {
  DlModel dl;
  IdtModel idt;
  AmiModel ami;

  void validate() const;
  friend bool operator==(const ModelSet&, const ModelSet&) = default;
};

}  // namespace dmpc

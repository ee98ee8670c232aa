#include "dmpc/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dmpc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BoundsInverted: return "BoundsInverted";
    case ErrorCode::ComfortOutsideBounds: return "ComfortOutsideBounds";
    case ErrorCode::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateSweep: return "DegenerateSweep";
    case ErrorCode::BadBounds: return "BadBounds";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::Schema: return "Schema";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::string field, std::vector<double> vector)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      field_(std::move(field)),
      vector_(std::move(vector)) {}

namespace {

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::InvalidValue, std::string(field) + " must be finite", field);
  }
}

}  // namespace

DrowsinessLevel::DrowsinessLevel(double value) : value_(value) {
  if (!(value >= kDlMin && value <= kDlMax)) {
    std::ostringstream os;
    os << "drowsiness level " << value << " outside [1, 5]";
    throw Error(ErrorCode::InvalidValue, os.str(), "dl");
  }
}

DrowsinessLevel DrowsinessLevel::clamped(double raw) {
  return DrowsinessLevel(std::clamp(raw, kDlMin, kDlMax));
}

WorkerState WorkerState::from_history(double d_current, double d_previous, double effort) {
  WorkerState w;
  w.d_current = DrowsinessLevel(d_current);
  const double delta = d_current - d_previous;
  w.d_plus = delta > 0.0 ? delta : 0.0;
  w.d_minus = delta < 0.0 ? -delta : 0.0;
  w.effort = effort;
  w.validate();
  return w;
}

void WorkerState::validate() const {
  if (!(d_plus >= 0.0) || !(d_minus >= 0.0)) {
    throw Error(ErrorCode::InvalidValue, "d_plus and d_minus must be >= 0", "d_plus");
  }
  if (d_plus != 0.0 && d_minus != 0.0) {
    throw Error(ErrorCode::InvalidValue, "at most one of d_plus, d_minus may be nonzero",
                "d_minus");
  }
  if (!(effort >= 0.0) || !std::isfinite(effort)) {
    throw Error(ErrorCode::InvalidValue, "effort must be finite and >= 0", "effort");
  }
}

void StateSnapshot::validate() const {
  if (workers.empty()) {
    throw Error(ErrorCode::InvalidValue, "snapshot has no workers", "workers");
  }
  for (const auto& w : workers) w.validate();
  if (!(temp_current >= 0.0 && temp_current <= 50.0)) {
    throw Error(ErrorCode::InvalidValue, "temp_current outside [0, 50] degC", "temp_current");
  }
  if (!(illum_current >= 0.0 && illum_current <= 10000.0)) {
    throw Error(ErrorCode::InvalidValue, "illum_current outside [0, 10000] lux",
                "illum_current");
  }
}

ControlSchedule::ControlSchedule(std::vector<double> temp_setpoints,
                                 std::vector<double> illum_setpoints)
    : temps_(std::move(temp_setpoints)), illums_(std::move(illum_setpoints)) {
  if (temps_.empty() || temps_.size() != illums_.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "schedule needs equal, nonzero temperature and illuminance lengths");
  }
}

ControlSchedule ControlSchedule::constant(std::size_t horizon, double temp, double illum) {
  return {std::vector<double>(horizon, temp), std::vector<double>(horizon, illum)};
}

ControlSchedule ControlSchedule::unflatten(std::span<const double> flat) {
  if (flat.empty() || flat.size() % 2 != 0) {
    throw Error(ErrorCode::ShapeMismatch, "flattened schedule must have even, nonzero length");
  }
  const auto h = flat.size() / 2;
  return {std::vector<double>(flat.begin(), flat.begin() + h),
          std::vector<double>(flat.begin() + h, flat.end())};
}

std::vector<double> ControlSchedule::flatten() const {
  std::vector<double> out;
  out.reserve(temps_.size() * 2);
  out.insert(out.end(), temps_.begin(), temps_.end());
  out.insert(out.end(), illums_.begin(), illums_.end());
  return out;
}

std::string_view to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::NOC: return "NOC";
    case ControlMode::MPC1: return "MPC1";
    case ControlMode::MPC2: return "MPC2";
  }
  return "?";
}

std::optional<ControlMode> parse_control_mode(std::string_view text) {
  if (text == "NOC") return ControlMode::NOC;
  if (text == "MPC1" || text == "MPC-1") return ControlMode::MPC1;
  if (text == "MPC2" || text == "MPC-2") return ControlMode::MPC2;
  return std::nullopt;
}

MpcConfig case1_config(ControlMode mode) {
  MpcConfig cfg;
  cfg.horizon = 4;
  cfg.step_hours = 0.25;
  cfg.num_workers = 5;
  cfg.temp_lo = 25.5;
  cfg.temp_hi = 26.5;
  cfg.illum_lo = 450.0;
  cfg.illum_hi = 750.0;
  cfg.temp_comfort = 26.0;
  cfg.illum_comfort = 600.0;
  cfg.p_temp = 0.5;
  cfg.p_illum = 1.0 / 150.0;
  cfg.penalty_cap = 2.0;
  cfg.mode = mode;
  return cfg;
}

MpcConfig case2_config(ControlMode mode) {
  MpcConfig cfg = case1_config(mode);
  cfg.num_workers = 6;
  cfg.temp_lo = 25.0;
  cfg.temp_hi = 27.0;
  return cfg;
}

void validate_config(const MpcConfig& cfg) {
  if (cfg.horizon < 1) {
    throw Error(ErrorCode::InvalidValue, "horizon must be >= 1", "horizon");
  }
  if (cfg.num_workers < 1) {
    throw Error(ErrorCode::InvalidValue, "num_workers must be >= 1", "num_workers");
  }
  const struct {
    double v;
    const char* name;
  } finite_fields[] = {
      {cfg.step_hours, "step_hours"},     {cfg.temp_lo, "temp_lo"},
      {cfg.temp_hi, "temp_hi"},           {cfg.illum_lo, "illum_lo"},
      {cfg.illum_hi, "illum_hi"},         {cfg.temp_comfort, "temp_comfort"},
      {cfg.illum_comfort, "illum_comfort"}, {cfg.p_temp, "p_temp"},
      {cfg.p_illum, "p_illum"},           {cfg.penalty_cap, "penalty_cap"},
  };
  for (const auto& f : finite_fields) require_finite(f.v, f.name);

  if (!(cfg.step_hours > 0.0)) {
    throw Error(ErrorCode::NonPositiveCoefficient, "step_hours must be > 0", "step_hours");
  }
  if (cfg.temp_lo > cfg.temp_hi) {
    throw Error(ErrorCode::BoundsInverted, "temp_lo > temp_hi", "temp_lo");
  }
  if (cfg.illum_lo > cfg.illum_hi) {
    throw Error(ErrorCode::BoundsInverted, "illum_lo > illum_hi", "illum_lo");
  }
  if (cfg.temp_comfort < cfg.temp_lo || cfg.temp_comfort > cfg.temp_hi) {
    throw Error(ErrorCode::ComfortOutsideBounds, "temp_comfort outside [temp_lo, temp_hi]",
                "temp_comfort");
  }
  if (cfg.illum_comfort < cfg.illum_lo || cfg.illum_comfort > cfg.illum_hi) {
    throw Error(ErrorCode::ComfortOutsideBounds, "illum_comfort outside [illum_lo, illum_hi]",
                "illum_comfort");
  }
  if (!(cfg.p_temp > 0.0)) {
    throw Error(ErrorCode::NonPositiveCoefficient, "p_temp must be > 0", "p_temp");
  }
  if (!(cfg.p_illum > 0.0)) {
    throw Error(ErrorCode::NonPositiveCoefficient, "p_illum must be > 0", "p_illum");
  }
  if (!(cfg.penalty_cap >= 0.0)) {
    throw Error(ErrorCode::NonPositiveCoefficient, "penalty_cap must be >= 0", "penalty_cap");
  }
}

std::optional<DlFeature> parse_dl_feature(std::string_view name) {
  for (std::size_t i = 0; i < kDlFeatureNames.size(); ++i) {
    if (kDlFeatureNames[i] == name) return static_cast<DlFeature>(i);
  }
  return std::nullopt;
}

void DlModel::validate() const {
  require_finite(intercept, "dl.intercept");
  for (std::size_t i = 0; i < coef.size(); ++i) {
    if (!std::isfinite(coef[i])) {
      const std::string field = "dl." + std::string(kDlFeatureNames[i]);
      throw Error(ErrorCode::InvalidValue, field + " must be finite", field);
    }
  }
}

void IdtModel::validate() const {
  if (!(k_up > 0.0 && k_up <= 1.0)) {
    throw Error(ErrorCode::InvalidValue, "k_up must lie in (0, 1]", "idt.k_up");
  }
  if (!(k_down > 0.0 && k_down <= 1.0)) {
    throw Error(ErrorCode::InvalidValue, "k_down must lie in (0, 1]", "idt.k_down");
  }
}

void AmiModel::validate() const {
  require_finite(theta0, "ami.theta0");
  require_finite(theta_prev, "ami.theta_prev");
  require_finite(theta_set, "ami.theta_set");
  if (!(std::abs(theta_prev) < 1.0)) {
    throw Error(ErrorCode::InvalidValue, "|theta_prev| must be < 1 for a stable rollout",
                "ami.theta_prev");
  }
}

void ModelSet::validate() const {
  dl.validate();
  idt.validate();
  ami.validate();
}

}  // namespace dmpc

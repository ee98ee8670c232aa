#include "dmpc/models.hpp"

#include "dmpc/detail/rollout_core.hpp"

namespace dmpc {

Increments increments(double x, double prev) {
  return {detail::positive_part(x - prev), detail::positive_part(prev - x)};
}

double predict_idt(const IdtModel& m, double temp_prev, double setpoint) {
  return detail::first_order_lag(m, temp_prev, setpoint);
}

double predict_ami(const AmiModel& m, double illum_prev, double setpoint) {
  return detail::illuminance_step(m, illum_prev, setpoint);
}

double dl_regression(const DlModel& m, const DlFeatures& x) {
  const detail::DlInputs<double> in{x.d_prev,  x.d_plus_prev, x.d_minus_prev, x.temp,
                                    x.temp_plus, x.temp_minus, x.illum,      x.illum_plus,
                                    x.illum_minus, x.effort};
  return detail::dl_linear(m, in);
}

DrowsinessLevel predict_dl(const DlModel& m, const DlFeatures& x) {
  return DrowsinessLevel(detail::clamp_dl(dl_regression(m, x)));
}

HorizonPrediction rollout(const ModelSet& models, const StateSnapshot& snapshot,
                          const ControlSchedule& schedule, const MpcConfig& cfg) {
  if (schedule.horizon() != cfg.horizon) {
    throw Error(ErrorCode::ShapeMismatch, "schedule length differs from cfg.horizon", "horizon");
  }
  if (snapshot.workers.size() != cfg.num_workers) {
    throw Error(ErrorCode::ShapeMismatch, "snapshot worker count differs from cfg.num_workers",
                "num_workers");
  }
  detail::BasicPrediction<double> p;
  detail::rollout_into<double>(models, snapshot, schedule.temp_setpoints(),
                               schedule.illum_setpoints(), p);
  return {p.workers, p.horizon, std::move(p.temps), std::move(p.illums), std::move(p.dls)};
}

double objective(const HorizonPrediction& pred) {
  if (pred.workers == 0 || pred.horizon == 0 || pred.dls.size() != pred.workers * pred.horizon) {
    throw Error(ErrorCode::ShapeMismatch, "prediction shape is inconsistent");
  }
  return detail::mean_dl<double>(pred);
}

double comfort_penalty(double temp, double illum, const MpcConfig& cfg) {
  return detail::comfort_penalty(detail::ComfortParams::from(cfg), temp, illum);
}

double constraint_violation(const HorizonPrediction& pred, const MpcConfig& cfg) {
  if (pred.temps.size() != pred.horizon || pred.illums.size() != pred.horizon) {
    throw Error(ErrorCode::ShapeMismatch, "prediction shape is inconsistent");
  }
  return detail::total_violation<double>(pred, detail::ComfortParams::from(cfg));
}

}  // namespace dmpc

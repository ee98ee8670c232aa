#pragma once

// Scalar reference recursion shared by models::rollout and the scalar batch
// kernel. Templated on the number type so tests can push dual numbers
// through the exact same code path.
//
// Every operation here has a lane-wise twin in the SIMD kernels; the
// primitives below are written in the form whose IEEE behaviour matches
// _mm256_max_pd / _mm256_min_pd / blend, and the evaluation order of every
// sum is fixed. Change one side and the other must follow.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dmpc/domain.hpp"

namespace dmpc::detail {

/// max(x, 0), returning +0 for -0 and NaN (MAXPD semantics).
template <class R>
inline R positive_part(const R& x) {
  return x > 0.0 ? x : R(0.0);
}

template <class R>
inline R clamp_dl(const R& x) {
  const R lo = x > kDlMin ? x : R(kDlMin);
  return lo < kDlMax ? lo : R(kDlMax);
}

template <class R>
inline R first_order_lag(const IdtModel& m, const R& prev, const R& setpoint) {
  const double k = setpoint >= prev ? m.k_up : m.k_down;
  return k * setpoint + (1.0 - k) * prev;
}

template <class R>
inline R illuminance_step(const AmiModel& m, const R& prev, const R& setpoint) {
  return positive_part(m.theta0 + m.theta_prev * prev + m.theta_set * setpoint);
}

template <class R>
struct DlInputs {
  R d_prev, d_plus_prev, d_minus_prev;
  R temp, temp_plus, temp_minus;
  R illum, illum_plus, illum_minus;
  R effort;
};

/// Unclamped regression value.
template <class R>
inline R dl_linear(const DlModel& m, const DlInputs<R>& x) {
  const auto& c = m.coef;
  R acc = m.intercept + c[0] * x.d_prev;
  acc = acc + c[1] * x.d_plus_prev;
  acc = acc + c[2] * x.d_minus_prev;
  acc = acc + c[3] * x.temp;
  acc = acc + c[4] * x.temp_plus;
  acc = acc + c[5] * x.temp_minus;
  acc = acc + c[6] * x.illum;
  acc = acc + c[7] * x.illum_plus;
  acc = acc + c[8] * x.illum_minus;
  acc = acc + c[9] * x.effort;
  return acc;
}

template <class R>
struct BasicPrediction {
  std::size_t workers = 0;
  std::size_t horizon = 0;
  std::vector<R> temps;
  std::vector<R> illums;
  std::vector<R> dls;  // row-major workers x horizon

  R& dl(std::size_t i, std::size_t t) { return dls[i * horizon + t]; }
  const R& dl(std::size_t i, std::size_t t) const { return dls[i * horizon + t]; }
};

/// Runs the horizon recursion from the snapshot under the given setpoints.
/// `out` is resized only when its shape changes.
template <class R>
void rollout_into(const ModelSet& models, const StateSnapshot& snap,
                  std::span<const R> temp_set, std::span<const R> illum_set,
                  BasicPrediction<R>& out) {
  const std::size_t horizon = temp_set.size();
  const std::size_t workers = snap.workers.size();
  out.workers = workers;
  out.horizon = horizon;
  out.temps.resize(horizon);
  out.illums.resize(horizon);
  out.dls.resize(workers * horizon);

  R temp_prev = R(snap.temp_current);
  R illum_prev = R(snap.illum_current);
  for (std::size_t t = 0; t < horizon; ++t) {
    const R temp = first_order_lag(models.idt, temp_prev, temp_set[t]);
    const R illum = illuminance_step(models.ami, illum_prev, illum_set[t]);
    out.temps[t] = temp;
    out.illums[t] = illum;

    const R temp_plus = positive_part(temp - temp_prev);
    const R temp_minus = positive_part(temp_prev - temp);
    const R illum_plus = positive_part(illum - illum_prev);
    const R illum_minus = positive_part(illum_prev - illum);

    for (std::size_t i = 0; i < workers; ++i) {
      const WorkerState& w = snap.workers[i];
      DlInputs<R> x{};
      if (t == 0) {
        x.d_prev = R(w.d_current.value());
        x.d_plus_prev = R(w.d_plus);
        x.d_minus_prev = R(w.d_minus);
      } else {
        x.d_prev = out.dl(i, t - 1);
        const R before = t >= 2 ? out.dl(i, t - 2) : R(w.d_current.value());
        x.d_plus_prev = positive_part(x.d_prev - before);
        x.d_minus_prev = positive_part(before - x.d_prev);
      }
      x.temp = temp;
      x.temp_plus = temp_plus;
      x.temp_minus = temp_minus;
      x.illum = illum;
      x.illum_plus = illum_plus;
      x.illum_minus = illum_minus;
      x.effort = R(w.effort);
      out.dl(i, t) = clamp_dl(dl_linear(models.dl, x));
    }
    temp_prev = temp;
    illum_prev = illum;
  }
}

/// Mean DL: per-worker sums over time, then summed over workers in order.
template <class R, class Prediction>
R mean_dl(const Prediction& p) {
  R total = R(0.0);
  for (std::size_t i = 0; i < p.workers; ++i) {
    R row = R(0.0);
    for (std::size_t t = 0; t < p.horizon; ++t) row = row + p.dl(i, t);
    total = total + row;
  }
  return total / static_cast<double>(p.workers * p.horizon);
}

struct ComfortParams {
  double temp_comfort;
  double illum_comfort;
  double p_temp;
  double p_illum;
  double penalty_cap;

  static ComfortParams from(const MpcConfig& cfg) {
    return {cfg.temp_comfort, cfg.illum_comfort, cfg.p_temp, cfg.p_illum, cfg.penalty_cap};
  }
};

template <class R>
inline R comfort_penalty(const ComfortParams& c, const R& temp, const R& illum) {
  using std::abs;
  return c.p_temp * abs(temp - c.temp_comfort) + c.p_illum * abs(illum - c.illum_comfort);
}

template <class R, class Prediction>
R total_violation(const Prediction& p, const ComfortParams& c) {
  R total = R(0.0);
  for (std::size_t t = 0; t < p.horizon; ++t) {
    total = total + positive_part(comfort_penalty<R>(c, p.temps[t], p.illums[t]) - c.penalty_cap);
  }
  return total;
}

}  // namespace dmpc::detail

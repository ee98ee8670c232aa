#pragma once

// Shared test fixtures and independent oracles. Nothing here calls into the
// library's prediction code; the oracles re-derive every quantity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dmpc/domain.hpp"
#include "dmpc/identify.hpp"
#include "dmpc/optimizer.hpp"

namespace dmpc::testing {

inline StateSnapshot uniform_snapshot(std::size_t workers, double dl, double dl_prev, double temp,
                                      double illum, double effort = 0.0) {
  StateSnapshot s;
  s.temp_current = temp;
  s.illum_current = illum;
  for (std::size_t i = 0; i < workers; ++i) {
    s.workers.push_back(WorkerState::from_history(dl, dl_prev, effort));
  }
  return s;
}

inline ModelSet identity_models(double dl_intercept = 2.0) {
  ModelSet m;
  m.dl.intercept = dl_intercept;
  m.idt = {1.0, 1.0};
  m.ami = {0.0, 0.0, 1.0};
  return m;
}

/// Temperature-sensitive fixture: cooling steps lower drowsiness, warmth
/// raises it, bright light lowers it.
inline ModelSet fixture_models() {
  ModelSet m;
  m.dl.intercept = 0.4;
  m.dl[DlFeature::DPrev] = 0.7;
  m.dl[DlFeature::DPlusPrev] = 0.1;
  m.dl[DlFeature::Temp] = 0.03;
  m.dl[DlFeature::TempPlus] = 0.2;
  m.dl[DlFeature::TempMinus] = -0.5;
  m.dl[DlFeature::Illum] = -0.0004;
  m.dl[DlFeature::IllumPlus] = -0.001;
  m.dl[DlFeature::IllumMinus] = 0.0005;
  m.dl[DlFeature::Effort] = -0.1;
  m.idt = {0.4, 0.6};
  m.ami = {20.0, 0.25, 0.72};
  return m;
}

/// Independent hand recursion: one worker's DL trajectory plus the room
/// trajectory, written directly from the model definitions.
struct OracleTrajectory {
  std::vector<double> temps, illums;
  std::vector<std::vector<double>> dls;  // [worker][t]
};

inline OracleTrajectory oracle_rollout(const ModelSet& m, const StateSnapshot& s,
                                       const std::vector<double>& temp_set,
                                       const std::vector<double>& illum_set) {
  auto pos = [](double x) { return x > 0 ? x : 0.0; };
  OracleTrajectory o;
  double tp = s.temp_current, lp = s.illum_current;
  for (std::size_t t = 0; t < temp_set.size(); ++t) {
    const double k = temp_set[t] >= tp ? m.idt.k_up : m.idt.k_down;
    const double T = k * temp_set[t] + (1 - k) * tp;
    const double L = std::max(0.0, m.ami.theta0 + m.ami.theta_prev * lp + m.ami.theta_set * illum_set[t]);
    o.temps.push_back(T);
    o.illums.push_back(L);
    tp = T;
    lp = L;
  }
  for (const auto& w : s.workers) {
    std::vector<double> hist{w.d_current.value() - w.d_plus + w.d_minus, w.d_current.value()};
    std::vector<double> row;
    double temp_before = s.temp_current, illum_before = s.illum_current;
    for (std::size_t t = 0; t < temp_set.size(); ++t) {
      const double d1 = hist[hist.size() - 1], d2 = hist[hist.size() - 2];
      const double dp = t == 0 ? w.d_plus : pos(d1 - d2);
      const double dm = t == 0 ? w.d_minus : pos(d2 - d1);
      const double T = o.temps[t], L = o.illums[t];
      const double f[10] = {d1,          dp,
                            dm,          T,
                            pos(T - temp_before), pos(temp_before - T),
                            L,           pos(L - illum_before),
                            pos(illum_before - L), w.effort};
      double raw = m.dl.intercept;
      for (int j = 0; j < 10; ++j) raw += m.dl.coef[j] * f[j];
      const double d = std::min(5.0, std::max(1.0, raw));
      row.push_back(d);
      hist.push_back(d);
      temp_before = T;
      illum_before = L;
    }
    o.dls.push_back(row);
  }
  return o;
}

inline double oracle_objective(const OracleTrajectory& o) {
  double s = 0;
  std::size_t n = 0;
  for (const auto& row : o.dls) {
    for (double d : row) {
      s += d;
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

inline double oracle_violation(const OracleTrajectory& o, const MpcConfig& cfg) {
  double v = 0;
  for (std::size_t t = 0; t < o.temps.size(); ++t) {
    const double pen = cfg.p_temp * std::fabs(o.temps[t] - cfg.temp_comfort) +
                       cfg.p_illum * std::fabs(o.illums[t] - cfg.illum_comfort);
    v += std::max(0.0, pen - cfg.penalty_cap);
  }
  return v;
}

/// Moderate random DL model whose trajectories stay mostly inside the scale.
inline ModelSet random_plant_models(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ModelSet m;
  m.dl[DlFeature::DPrev] = 0.5 + 0.2 * u(rng);
  m.dl[DlFeature::DPlusPrev] = 0.2 * u(rng);
  m.dl[DlFeature::DMinusPrev] = 0.2 * u(rng);
  m.dl[DlFeature::Temp] = 0.05 * u(rng);
  m.dl[DlFeature::TempPlus] = 0.3 * u(rng);
  m.dl[DlFeature::TempMinus] = 0.3 * u(rng);
  m.dl[DlFeature::Illum] = 0.0005 * u(rng);
  m.dl[DlFeature::IllumPlus] = 0.002 * u(rng);
  m.dl[DlFeature::IllumMinus] = 0.002 * u(rng);
  m.dl[DlFeature::Effort] = 0.5 * u(rng);
  // Centre the stationary level near 3.
  const double drive = m.dl[DlFeature::Temp] * 26.0 + m.dl[DlFeature::Illum] * 600.0 +
                       m.dl[DlFeature::Effort] * 0.15;
  m.dl.intercept = 3.0 * (1.0 - m.dl[DlFeature::DPrev]) - drive + 0.1 * u(rng);
  m.idt = {0.2 + 0.7 * (u(rng) + 1) / 2, 0.2 + 0.7 * (u(rng) + 1) / 2};
  m.ami = {30.0 * u(rng), 0.3 * u(rng), 0.6 + 0.3 * (u(rng) + 1) / 2};
  return m;
}

/// Open-loop telemetry written straight from the model definitions, with
/// setpoints swept uniformly over the given bounds. `dl_noise_sd` adds a
/// Gaussian shock to each unclamped DL value.
inline TelemetryTable synthetic_telemetry(const ModelSet& m, std::size_t workers,
                                          std::size_t steps, double dl_noise_sd,
                                          std::mt19937_64& rng, double temp_lo = 25.0,
                                          double temp_hi = 27.0, double illum_lo = 450.0,
                                          double illum_hi = 750.0) {
  std::uniform_real_distribution<double> ts(temp_lo, temp_hi), ls(illum_lo, illum_hi),
      start(2.0, 4.0), eff(0.0, 0.3);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto pos = [](double x) { return x > 0 ? x : 0.0; };
  std::vector<double> temp(steps), illum(steps), tset(steps), lset(steps);
  tset[0] = ts(rng);
  lset[0] = ls(rng);
  temp[0] = tset[0];
  illum[0] = lset[0];
  for (std::size_t t = 1; t < steps; ++t) {
    tset[t] = ts(rng);
    lset[t] = ls(rng);
    const double k = tset[t] >= temp[t - 1] ? m.idt.k_up : m.idt.k_down;
    temp[t] = k * tset[t] + (1 - k) * temp[t - 1];
    illum[t] = std::max(0.0, m.ami.theta0 + m.ami.theta_prev * illum[t - 1] + m.ami.theta_set * lset[t]);
  }
  std::vector<std::vector<double>> dl(workers, std::vector<double>(steps)),
      effort(workers, std::vector<double>(steps));
  for (std::size_t i = 0; i < workers; ++i) {
    for (std::size_t t = 0; t < steps; ++t) effort[i][t] = eff(rng);
    dl[i][0] = start(rng);
    dl[i][1] = start(rng);
    for (std::size_t t = 2; t < steps; ++t) {
      const double f[10] = {dl[i][t - 1], pos(dl[i][t - 1] - dl[i][t - 2]),
                            pos(dl[i][t - 2] - dl[i][t - 1]), temp[t],
                            pos(temp[t] - temp[t - 1]), pos(temp[t - 1] - temp[t]),
                            illum[t], pos(illum[t] - illum[t - 1]),
                            pos(illum[t - 1] - illum[t]), effort[i][t - 1]};
      double raw = m.dl.intercept;
      for (int j = 0; j < 10; ++j) raw += m.dl.coef[j] * f[j];
      if (dl_noise_sd > 0) raw += dl_noise_sd * noise(rng);
      dl[i][t] = std::min(5.0, std::max(1.0, raw));
    }
  }
  TelemetryTable table;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < workers; ++i) {
      table.rows.push_back({static_cast<std::int64_t>(t), "w" + std::to_string(i), dl[i][t],
                            effort[i][t], temp[t], illum[t], tset[t], lset[t]});
    }
  }
  return table;
}

struct GridBest {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> point;
  std::size_t feasible_points = 0;
};

/// Exhaustive search over `levels` evenly spaced values per variable.
template <class Objective, class Violation>
GridBest grid_search(const std::vector<double>& lo, const std::vector<double>& hi,
                     std::size_t levels, Objective objective, Violation violation) {
  GridBest best;
  const std::size_t dim = lo.size();
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> x(dim);
  for (;;) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(idx[d]) /
                         static_cast<double>(levels - 1);
    }
    if (violation(x) == 0.0) {
      ++best.feasible_points;
      const double f = objective(x);
      if (f < best.objective) {
        best.objective = f;
        best.point = x;
      }
    }
    std::size_t d = 0;
    while (d < dim && ++idx[d] == levels) idx[d++] = 0;
    if (d == dim) break;
  }
  return best;
}

/// Forward-mode dual number for gradient checks through the templated
/// recursion.
struct Dual {
  double v = 0.0;
  double d = 0.0;
  Dual() = default;
  Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}  // NOLINT implicit
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
inline bool operator>(Dual a, Dual b) { return a.v > b.v; }
inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator>=(Dual a, Dual b) { return a.v >= b.v; }
inline Dual abs(Dual a) { return a.v < 0 ? Dual{-a.v, -a.d} : a; }

}  // namespace dmpc::testing

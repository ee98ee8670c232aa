// NEON variant: two candidate schedules per float64x2_t.
// FMAX/FMIN differ from the scalar reference only for NaN inputs, which the
// optimizer rejects before they reach a kernel.

#include <arm_neon.h>

#include <vector>

#include "dmpc/kernels.hpp"

namespace dmpc::kernels::impl {
namespace {

inline float64x2_t positive_part(float64x2_t x) { return vmaxq_f64(x, vdupq_n_f64(0.0)); }

}  // namespace

void evaluate_neon(const RolloutProblem& problem, std::span<const double> schedules,
                   std::size_t count, std::span<double> objective,
                   std::span<double> violation) {
  const ModelSet& m = *problem.models;
  const StateSnapshot& snap = *problem.snapshot;
  const auto& comfort = problem.comfort;
  const std::size_t h = problem.horizon;
  const std::size_t workers = snap.workers.size();

  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t k_up = vdupq_n_f64(m.idt.k_up);
  const float64x2_t k_down = vdupq_n_f64(m.idt.k_down);
  const float64x2_t theta0 = vdupq_n_f64(m.ami.theta0);
  const float64x2_t theta_prev = vdupq_n_f64(m.ami.theta_prev);
  const float64x2_t theta_set = vdupq_n_f64(m.ami.theta_set);
  const float64x2_t intercept = vdupq_n_f64(m.dl.intercept);
  float64x2_t coef[kDlFeatureCount];
  for (std::size_t j = 0; j < kDlFeatureCount; ++j) coef[j] = vdupq_n_f64(m.dl.coef[j]);
  const float64x2_t dl_lo = vdupq_n_f64(kDlMin);
  const float64x2_t dl_hi = vdupq_n_f64(kDlMax);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t temp_c = vdupq_n_f64(comfort.temp_comfort);
  const float64x2_t illum_c = vdupq_n_f64(comfort.illum_comfort);
  const float64x2_t p_temp = vdupq_n_f64(comfort.p_temp);
  const float64x2_t p_illum = vdupq_n_f64(comfort.p_illum);
  const float64x2_t cap = vdupq_n_f64(comfort.penalty_cap);
  const float64x2_t cells = vdupq_n_f64(static_cast<double>(workers * h));

  std::vector<float64x2_t> prev(workers), before(workers), row(workers);

  std::size_t c = 0;
  for (; c + 2 <= count; c += 2) {
    for (std::size_t i = 0; i < workers; ++i) {
      prev[i] = vdupq_n_f64(snap.workers[i].d_current.value());
      before[i] = prev[i];
      row[i] = zero;
    }
    float64x2_t temp_prev = vdupq_n_f64(snap.temp_current);
    float64x2_t illum_prev = vdupq_n_f64(snap.illum_current);
    float64x2_t viol = zero;

    for (std::size_t t = 0; t < h; ++t) {
      const float64x2_t temp_set = vld1q_f64(&schedules[t * count + c]);
      const float64x2_t illum_set = vld1q_f64(&schedules[(h + t) * count + c]);

      const uint64x2_t raising = vcgeq_f64(temp_set, temp_prev);
      const float64x2_t k = vbslq_f64(raising, k_up, k_down);
      const float64x2_t temp =
          vaddq_f64(vmulq_f64(k, temp_set), vmulq_f64(vsubq_f64(one, k), temp_prev));
      const float64x2_t illum = positive_part(vaddq_f64(
          vaddq_f64(theta0, vmulq_f64(theta_prev, illum_prev)), vmulq_f64(theta_set, illum_set)));

      const float64x2_t temp_plus = positive_part(vsubq_f64(temp, temp_prev));
      const float64x2_t temp_minus = positive_part(vsubq_f64(temp_prev, temp));
      const float64x2_t illum_plus = positive_part(vsubq_f64(illum, illum_prev));
      const float64x2_t illum_minus = positive_part(vsubq_f64(illum_prev, illum));

      for (std::size_t i = 0; i < workers; ++i) {
        const WorkerState& w = snap.workers[i];
        float64x2_t d_plus, d_minus;
        if (t == 0) {
          d_plus = vdupq_n_f64(w.d_plus);
          d_minus = vdupq_n_f64(w.d_minus);
        } else {
          d_plus = positive_part(vsubq_f64(prev[i], before[i]));
          d_minus = positive_part(vsubq_f64(before[i], prev[i]));
        }
        float64x2_t acc = vaddq_f64(intercept, vmulq_f64(coef[0], prev[i]));
        acc = vaddq_f64(acc, vmulq_f64(coef[1], d_plus));
        acc = vaddq_f64(acc, vmulq_f64(coef[2], d_minus));
        acc = vaddq_f64(acc, vmulq_f64(coef[3], temp));
        acc = vaddq_f64(acc, vmulq_f64(coef[4], temp_plus));
        acc = vaddq_f64(acc, vmulq_f64(coef[5], temp_minus));
        acc = vaddq_f64(acc, vmulq_f64(coef[6], illum));
        acc = vaddq_f64(acc, vmulq_f64(coef[7], illum_plus));
        acc = vaddq_f64(acc, vmulq_f64(coef[8], illum_minus));
        acc = vaddq_f64(acc, vmulq_f64(coef[9], vdupq_n_f64(w.effort)));
        const float64x2_t d = vminq_f64(vmaxq_f64(acc, dl_lo), dl_hi);

        before[i] = prev[i];
        prev[i] = d;
        row[i] = vaddq_f64(row[i], d);
      }

      const float64x2_t penalty =
          vaddq_f64(vmulq_f64(p_temp, vabsq_f64(vsubq_f64(temp, temp_c))),
                    vmulq_f64(p_illum, vabsq_f64(vsubq_f64(illum, illum_c))));
      viol = vaddq_f64(viol, positive_part(vsubq_f64(penalty, cap)));

      temp_prev = temp;
      illum_prev = illum;
    }

    float64x2_t total = zero;
    for (std::size_t i = 0; i < workers; ++i) total = vaddq_f64(total, row[i]);
    vst1q_f64(&objective[c], vdivq_f64(total, cells));
    vst1q_f64(&violation[c], viol);
  }

  evaluate_scalar_range(problem, schedules, count, c, objective, violation);
}

}  // namespace dmpc::kernels::impl

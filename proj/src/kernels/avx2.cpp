// AVX2 variant: four candidate schedules per __m256d, one per lane.
// Compiled with -mavx2 only; see the note in rollout_core.hpp on matching
// the scalar reference bit for bit.

#include <immintrin.h>

#include <vector>

#include "dmpc/kernels.hpp"

namespace dmpc::kernels::impl {
namespace {

inline __m256d positive_part(__m256d x) { return _mm256_max_pd(x, _mm256_setzero_pd()); }

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

}  // namespace

void evaluate_avx2(const RolloutProblem& problem, std::span<const double> schedules,
                   std::size_t count, std::span<double> objective,
                   std::span<double> violation) {
  const ModelSet& m = *problem.models;
  const StateSnapshot& snap = *problem.snapshot;
  const auto& comfort = problem.comfort;
  const std::size_t h = problem.horizon;
  const std::size_t workers = snap.workers.size();

  const __m256d zero = _mm256_setzero_pd();
  const __m256d k_up = _mm256_set1_pd(m.idt.k_up);
  const __m256d k_down = _mm256_set1_pd(m.idt.k_down);
  const __m256d theta0 = _mm256_set1_pd(m.ami.theta0);
  const __m256d theta_prev = _mm256_set1_pd(m.ami.theta_prev);
  const __m256d theta_set = _mm256_set1_pd(m.ami.theta_set);
  const __m256d intercept = _mm256_set1_pd(m.dl.intercept);
  __m256d coef[kDlFeatureCount];
  for (std::size_t j = 0; j < kDlFeatureCount; ++j) coef[j] = _mm256_set1_pd(m.dl.coef[j]);
  const __m256d dl_lo = _mm256_set1_pd(kDlMin);
  const __m256d dl_hi = _mm256_set1_pd(kDlMax);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d temp_c = _mm256_set1_pd(comfort.temp_comfort);
  const __m256d illum_c = _mm256_set1_pd(comfort.illum_comfort);
  const __m256d p_temp = _mm256_set1_pd(comfort.p_temp);
  const __m256d p_illum = _mm256_set1_pd(comfort.p_illum);
  const __m256d cap = _mm256_set1_pd(comfort.penalty_cap);
  const __m256d cells = _mm256_set1_pd(static_cast<double>(workers * h));

  // std::vector only loses the vector_size attribute on the type argument;
  // element alignment still comes from aligned new.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wignored-attributes"
  std::vector<__m256d> prev(workers), before(workers), row(workers);
#pragma GCC diagnostic pop

  std::size_t c = 0;
  for (; c + 4 <= count; c += 4) {
    for (std::size_t i = 0; i < workers; ++i) {
      prev[i] = _mm256_set1_pd(snap.workers[i].d_current.value());
      before[i] = prev[i];
      row[i] = zero;
    }
    __m256d temp_prev = _mm256_set1_pd(snap.temp_current);
    __m256d illum_prev = _mm256_set1_pd(snap.illum_current);
    __m256d viol = zero;

    for (std::size_t t = 0; t < h; ++t) {
      const __m256d temp_set = _mm256_loadu_pd(&schedules[t * count + c]);
      const __m256d illum_set = _mm256_loadu_pd(&schedules[(h + t) * count + c]);

      const __m256d raising = _mm256_cmp_pd(temp_set, temp_prev, _CMP_GE_OQ);
      const __m256d k = _mm256_blendv_pd(k_down, k_up, raising);
      const __m256d temp = _mm256_add_pd(_mm256_mul_pd(k, temp_set),
                                         _mm256_mul_pd(_mm256_sub_pd(one, k), temp_prev));
      const __m256d illum = positive_part(
          _mm256_add_pd(_mm256_add_pd(theta0, _mm256_mul_pd(theta_prev, illum_prev)),
                        _mm256_mul_pd(theta_set, illum_set)));

      const __m256d temp_plus = positive_part(_mm256_sub_pd(temp, temp_prev));
      const __m256d temp_minus = positive_part(_mm256_sub_pd(temp_prev, temp));
      const __m256d illum_plus = positive_part(_mm256_sub_pd(illum, illum_prev));
      const __m256d illum_minus = positive_part(_mm256_sub_pd(illum_prev, illum));

      for (std::size_t i = 0; i < workers; ++i) {
        const WorkerState& w = snap.workers[i];
        __m256d d_plus, d_minus;
        if (t == 0) {
          d_plus = _mm256_set1_pd(w.d_plus);
          d_minus = _mm256_set1_pd(w.d_minus);
        } else {
          d_plus = positive_part(_mm256_sub_pd(prev[i], before[i]));
          d_minus = positive_part(_mm256_sub_pd(before[i], prev[i]));
        }
        __m256d acc = _mm256_add_pd(intercept, _mm256_mul_pd(coef[0], prev[i]));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[1], d_plus));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[2], d_minus));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[3], temp));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[4], temp_plus));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[5], temp_minus));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[6], illum));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[7], illum_plus));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[8], illum_minus));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(coef[9], _mm256_set1_pd(w.effort)));
        const __m256d d = _mm256_min_pd(_mm256_max_pd(acc, dl_lo), dl_hi);

        before[i] = prev[i];
        prev[i] = d;
        row[i] = _mm256_add_pd(row[i], d);
      }

      const __m256d penalty =
          _mm256_add_pd(_mm256_mul_pd(p_temp, abs_pd(_mm256_sub_pd(temp, temp_c))),
                        _mm256_mul_pd(p_illum, abs_pd(_mm256_sub_pd(illum, illum_c))));
      viol = _mm256_add_pd(viol, positive_part(_mm256_sub_pd(penalty, cap)));

      temp_prev = temp;
      illum_prev = illum;
    }

    __m256d total = zero;
    for (std::size_t i = 0; i < workers; ++i) total = _mm256_add_pd(total, row[i]);
    _mm256_storeu_pd(&objective[c], _mm256_div_pd(total, cells));
    _mm256_storeu_pd(&violation[c], viol);
  }

  evaluate_scalar_range(problem, schedules, count, c, objective, violation);
}

}  // namespace dmpc::kernels::impl

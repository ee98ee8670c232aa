#include <vector>

#include "dmpc/kernels.hpp"

namespace dmpc::kernels::impl {

void evaluate_scalar_range(const RolloutProblem& problem, std::span<const double> schedules,
                           std::size_t count, std::size_t first, std::span<double> objective,
                           std::span<double> violation) {
  const std::size_t h = problem.horizon;
  std::vector<double> temps(h);
  std::vector<double> illums(h);
  detail::BasicPrediction<double> pred;
  for (std::size_t c = first; c < count; ++c) {
    for (std::size_t t = 0; t < h; ++t) {
      temps[t] = schedules[t * count + c];
      illums[t] = schedules[(h + t) * count + c];
    }
    detail::rollout_into<double>(*problem.models, *problem.snapshot, temps, illums, pred);
    objective[c] = detail::mean_dl<double>(pred);
    violation[c] = detail::total_violation<double>(pred, problem.comfort);
  }
}

void evaluate_scalar(const RolloutProblem& problem, std::span<const double> schedules,
                     std::size_t count, std::span<double> objective,
                     std::span<double> violation) {
  evaluate_scalar_range(problem, schedules, count, 0, objective, violation);
}

}  // namespace dmpc::kernels::impl

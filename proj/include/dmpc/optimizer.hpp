#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dmpc {

/// DE/rand/1/bin settings. population_size = 0 means 10 x dimension.
struct DeParams {
  std::size_t population_size = 0;
  double mutation_factor = 0.7;
  double crossover_rate = 0.9;
  std::size_t max_generations = 200;
  double tolerance = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;
  [[nodiscard]] std::size_t population_for(std::size_t dimension) const;
};

struct DeResult {
  std::vector<double> best_vector;
  double best_objective = 0.0;
  double best_violation = 0.0;
  std::size_t generations_used = 0;
  std::size_t evaluations = 0;
  bool feasible = false;
};

/// A row-major block of candidate vectors handed to a batch evaluator.
struct CandidateBatch {
  std::span<const double> data;
  std::size_t count = 0;
  std::size_t dimension = 0;

  [[nodiscard]] std::span<const double> row(std::size_t c) const {
    return data.subspan(c * dimension, dimension);
  }
};

/// Fills objective[c] and violation[c] (>= 0) for every candidate.
using BatchEvaluator =
    std::function<void(const CandidateBatch&, std::span<double> objective,
                       std::span<double> violation)>;

using ObjectiveFn = std::function<double(std::span<const double>)>;

/// Deb ordering: feasible beats infeasible, lower violation between
/// infeasibles, lower objective between feasibles. Strict.
bool deb_better(double obj_a, double viol_a, double obj_b, double viol_b);

/// Minimizes over the box [lower, upper]. Whole generations are scored by
/// one evaluator call, so the result is independent of how the evaluator
/// schedules its work. Deterministic for a fixed seed.
/// Throws BadBounds, and NonFiniteObjective carrying the offending vector.
DeResult de_minimize(const BatchEvaluator& evaluate, std::span<const double> lower,
                     std::span<const double> upper, const DeParams& params);

/// Per-vector convenience overload.
DeResult de_minimize(const ObjectiveFn& objective, const ObjectiveFn& violation,
                     std::span<const double> lower, std::span<const double> upper,
                     const DeParams& params);

}  // namespace dmpc

#include "dmpc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dmpc/error.hpp"

namespace dmpc {

void DeParams::validate() const {
  if (population_size != 0 && population_size < 4) {
    throw Error(ErrorCode::InvalidValue, "population_size must be >= 4 (or 0 for auto)",
                "population_size");
  }
  if (!(mutation_factor > 0.0 && mutation_factor <= 2.0)) {
    throw Error(ErrorCode::InvalidValue, "mutation_factor must lie in (0, 2]",
                "mutation_factor");
  }
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidValue, "crossover_rate must lie in [0, 1]", "crossover_rate");
  }
  if (max_generations < 1) {
    throw Error(ErrorCode::InvalidValue, "max_generations must be >= 1", "max_generations");
  }
  if (!(tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidValue, "tolerance must be >= 0", "tolerance");
  }
}

std::size_t DeParams::population_for(std::size_t dimension) const {
  if (population_size != 0) return population_size;
  return std::max<std::size_t>(4, 10 * dimension);
}

bool deb_better(double obj_a, double viol_a, double obj_b, double viol_b) {
  const bool feas_a = viol_a == 0.0;
  const bool feas_b = viol_b == 0.0;
  if (feas_a && feas_b) return obj_a < obj_b;
  if (feas_a != feas_b) return feas_a;
  return viol_a < viol_b;
}

namespace {

void check_scores(const CandidateBatch& batch, std::span<const double> obj,
                  std::span<const double> viol) {
  for (std::size_t c = 0; c < batch.count; ++c) {
    if (!std::isfinite(obj[c]) || !std::isfinite(viol[c])) {
      std::ostringstream os;
      os << (std::isfinite(obj[c]) ? "violation" : "objective") << " is not finite at [";
      const auto row = batch.row(c);
      for (std::size_t j = 0; j < row.size(); ++j) os << (j ? ", " : "") << row[j];
      os << "]";
      throw Error(ErrorCode::NonFiniteObjective, os.str(), {},
                  std::vector<double>(row.begin(), row.end()));
    }
    if (viol[c] < 0.0) {
      throw Error(ErrorCode::InvalidValue, "violation callback returned a negative value");
    }
  }
}

bool converged(std::span<const double> obj, std::span<const double> viol, double tolerance) {
  if (std::any_of(viol.begin(), viol.end(), [](double v) { return v != 0.0; })) return false;
  const auto [lo, hi] = std::minmax_element(obj.begin(), obj.end());
  return *hi - *lo < tolerance;
}

}  // namespace

DeResult de_minimize(const BatchEvaluator& evaluate, std::span<const double> lower,
                     std::span<const double> upper, const DeParams& params) {
  params.validate();
  if (lower.empty() || lower.size() != upper.size()) {
    throw Error(ErrorCode::BadBounds, "bounds must be nonempty and of equal length");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j]) {
      std::ostringstream os;
      os << "bad bounds at component " << j << ": [" << lower[j] << ", " << upper[j] << "]";
      throw Error(ErrorCode::BadBounds, os.str());
    }
  }

  const std::size_t dim = lower.size();
  const std::size_t np = params.population_for(dim);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);

  std::vector<double> pop(np * dim);
  std::vector<double> trial(np * dim);
  std::vector<double> pop_obj(np), pop_viol(np), trial_obj(np), trial_viol(np);

  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double x = lower[j] + unit(rng) * (upper[j] - lower[j]);
      pop[i * dim + j] = std::clamp(x, lower[j], upper[j]);
    }
  }

  DeResult result;
  const CandidateBatch pop_batch{pop, np, dim};
  evaluate(pop_batch, pop_obj, pop_viol);
  check_scores(pop_batch, pop_obj, pop_viol);
  result.evaluations = np;

  std::size_t best = 0;
  for (std::size_t i = 1; i < np; ++i) {
    if (deb_better(pop_obj[i], pop_viol[i], pop_obj[best], pop_viol[best])) best = i;
  }

  const CandidateBatch trial_batch{trial, np, dim};
  std::size_t generation = 0;
  while (generation < params.max_generations &&
         !converged(pop_obj, pop_viol, params.tolerance)) {
    ++generation;
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = pick_dim(rng);
      for (std::size_t j = 0; j < dim; ++j) {
        double x = pop[i * dim + j];
        if (unit(rng) < params.crossover_rate || j == forced) {
          x = pop[r1 * dim + j] +
              params.mutation_factor * (pop[r2 * dim + j] - pop[r3 * dim + j]);
        }
        trial[i * dim + j] = std::clamp(x, lower[j], upper[j]);
      }
    }

    evaluate(trial_batch, trial_obj, trial_viol);
    check_scores(trial_batch, trial_obj, trial_viol);
    result.evaluations += np;

    // Replace unless the trial is strictly worse; ties let the population drift.
    for (std::size_t i = 0; i < np; ++i) {
      if (!deb_better(pop_obj[i], pop_viol[i], trial_obj[i], trial_viol[i])) {
        std::copy_n(trial.begin() + static_cast<std::ptrdiff_t>(i * dim), dim,
                    pop.begin() + static_cast<std::ptrdiff_t>(i * dim));
        pop_obj[i] = trial_obj[i];
        pop_viol[i] = trial_viol[i];
      }
    }
    for (std::size_t i = 0; i < np; ++i) {
      if (deb_better(pop_obj[i], pop_viol[i], pop_obj[best], pop_viol[best])) best = i;
    }
  }

  result.best_vector.assign(pop.begin() + static_cast<std::ptrdiff_t>(best * dim),
                            pop.begin() + static_cast<std::ptrdiff_t>((best + 1) * dim));
  result.best_objective = pop_obj[best];
  result.best_violation = pop_viol[best];
  result.feasible = result.best_violation == 0.0;
  result.generations_used = generation;
  return result;
}

DeResult de_minimize(const ObjectiveFn& objective, const ObjectiveFn& violation,
                     std::span<const double> lower, std::span<const double> upper,
                     const DeParams& params) {
  const BatchEvaluator batch = [&](const CandidateBatch& b, std::span<double> obj,
                                   std::span<double> viol) {
    for (std::size_t c = 0; c < b.count; ++c) {
      obj[c] = objective(b.row(c));
      viol[c] = violation(b.row(c));
    }
  };
  return de_minimize(batch, lower, upper, params);
}

}  // namespace dmpc

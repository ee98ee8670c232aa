#pragma once

// Batched horizon evaluation. The optimizer scores a whole population of
// candidate schedules per generation; these kernels evaluate objective and
// comfort violation for many schedules at once.
//
// Layout: `schedules` is structure-of-arrays with 2*H rows (H temperature
// setpoints then H illuminance setpoints) of `count` candidates each, i.e.
// setpoint r of candidate c lives at schedules[r * count + c].
//
// All variants produce results bit-identical to the scalar reference.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "dmpc/detail/rollout_core.hpp"
#include "dmpc/domain.hpp"

namespace dmpc::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

struct RolloutProblem {
  const ModelSet* models = nullptr;
  const StateSnapshot* snapshot = nullptr;
  detail::ComfortParams comfort{};
  std::size_t horizon = 0;
};

/// True when the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Best available variant, unless overridden by force_isa() or the
/// DMPC_KERNEL environment variable (scalar | avx2 | neon).
Isa active_isa();

/// Pins (or with nullopt, releases) the variant used by evaluate_schedules.
/// Throws InvalidValue if the variant is unavailable.
void force_isa(std::optional<Isa> isa);

void evaluate_schedules(const RolloutProblem& problem, std::span<const double> schedules,
                        std::size_t count, std::span<double> objective,
                        std::span<double> violation);

void evaluate_schedules(Isa isa, const RolloutProblem& problem,
                        std::span<const double> schedules, std::size_t count,
                        std::span<double> objective, std::span<double> violation);

namespace impl {

using KernelFn = void (*)(const RolloutProblem&, std::span<const double>, std::size_t,
                          std::span<double>, std::span<double>);

void evaluate_scalar(const RolloutProblem&, std::span<const double>, std::size_t,
                     std::span<double>, std::span<double>);
void evaluate_avx2(const RolloutProblem&, std::span<const double>, std::size_t,
                   std::span<double>, std::span<double>);
void evaluate_neon(const RolloutProblem&, std::span<const double>, std::size_t,
                   std::span<double>, std::span<double>);

/// Scalar evaluation of candidates [first, count); SIMD variants use it for
/// the tail that does not fill a vector.
void evaluate_scalar_range(const RolloutProblem&, std::span<const double>, std::size_t count,
                           std::size_t first, std::span<double>, std::span<double>);

}  // namespace impl
}  // namespace dmpc::kernels

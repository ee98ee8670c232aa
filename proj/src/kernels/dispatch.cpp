#include <atomic>
#include <cstdlib>
#include <string>

#include "dmpc/kernels.hpp"

namespace dmpc::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "neon") return Isa::Neon;
  return std::nullopt;
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(DMPC_HAVE_AVX2_KERNEL)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(DMPC_HAVE_NEON_KERNEL)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

namespace {

// -1: not forced; otherwise the Isa value.
std::atomic<int> g_forced{-1};

Isa detect() {
  if (const char* env = std::getenv("DMPC_KERNEL")) {
    if (auto isa = parse_isa(env); isa && isa_available(*isa)) return *isa;
  }
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

impl::KernelFn kernel_for(Isa isa) {
  switch (isa) {
#if defined(DMPC_HAVE_AVX2_KERNEL)
    case Isa::Avx2: return &impl::evaluate_avx2;
#endif
#if defined(DMPC_HAVE_NEON_KERNEL)
    case Isa::Neon: return &impl::evaluate_neon;
#endif
    default: return &impl::evaluate_scalar;
  }
}

}  // namespace

Isa active_isa() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa detected = detect();
  return detected;
}

void force_isa(std::optional<Isa> isa) {
  if (isa && !isa_available(*isa)) {
    throw Error(ErrorCode::InvalidValue,
                "kernel variant " + std::string(to_string(*isa)) + " is not available here");
  }
  g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

void evaluate_schedules(Isa isa, const RolloutProblem& problem,
                        std::span<const double> schedules, std::size_t count,
                        std::span<double> objective, std::span<double> violation) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::InvalidValue,
                "kernel variant " + std::string(to_string(isa)) + " is not available here");
  }
  if (problem.models == nullptr || problem.snapshot == nullptr || problem.horizon == 0) {
    throw Error(ErrorCode::InvalidValue, "rollout problem is incomplete");
  }
  if (schedules.size() != 2 * problem.horizon * count || objective.size() < count ||
      violation.size() < count) {
    throw Error(ErrorCode::ShapeMismatch, "batch buffers do not match horizon and count");
  }
  kernel_for(isa)(problem, schedules, count, objective, violation);
}

void evaluate_schedules(const RolloutProblem& problem, std::span<const double> schedules,
                        std::size_t count, std::span<double> objective,
                        std::span<double> violation) {
  evaluate_schedules(active_isa(), problem, schedules, count, objective, violation);
}

}  // namespace dmpc::kernels

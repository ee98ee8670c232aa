#include "dmpc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "dmpc/models.hpp"

namespace dmpc {

ModelSet reference_models() {
  ModelSet m;
  m.dl.intercept = 0.1;
  m.dl[DlFeature::DPrev] = 0.8;
  m.dl[DlFeature::DPlusPrev] = 0.1;
  m.dl[DlFeature::DMinusPrev] = -0.05;
  m.dl[DlFeature::Temp] = 0.02;
  m.dl[DlFeature::TempPlus] = 0.1;
  m.dl[DlFeature::TempMinus] = -0.6;
  m.dl[DlFeature::Illum] = -0.0002;
  m.dl[DlFeature::IllumPlus] = -0.002;
  m.dl[DlFeature::IllumMinus] = 0.001;
  m.dl[DlFeature::Effort] = -0.2;
  m.idt = {0.3, 0.5};
  m.ami = {0.0, 0.2, 0.8};
  return m;
}

std::vector<double> reference_drift(std::size_t steps, std::size_t lunch_start,
                                    std::size_t lunch_steps) {
  std::vector<double> drift(steps + 1, 0.0);
  const std::size_t from = lunch_start + lunch_steps;
  for (std::size_t s = from; s < std::min(drift.size(), from + 8); ++s) drift[s] = 0.12;
  return drift;
}

void PlantConfig::validate() const {
  truth.validate();
  const struct {
    double v;
    const char* name;
  } sds[] = {{temp_disturbance_sd, "temp_disturbance_sd"},
             {illum_disturbance_sd, "illum_disturbance_sd"},
             {dl_noise_sd, "dl_noise_sd"},
             {instant_sd, "instant_sd"}};
  for (const auto& s : sds) {
    if (!(s.v >= 0.0) || !std::isfinite(s.v)) {
      throw Error(ErrorCode::InvalidValue, std::string(s.name) + " must be >= 0", s.name);
    }
  }
  if (substeps < 1) {
    throw Error(ErrorCode::InvalidValue, "substeps must be >= 1", "substeps");
  }
  if (!(ambient_pull >= 0.0 && ambient_pull <= 1.0)) {
    throw Error(ErrorCode::InvalidValue, "ambient_pull must lie in [0, 1]", "ambient_pull");
  }
  for (double d : drift) {
    if (!std::isfinite(d)) throw Error(ErrorCode::InvalidValue, "drift must be finite", "drift");
  }
}

double PlantConfig::drift_at(std::int64_t step) const {
  if (drift.empty() || step < 0) return 0.0;
  return drift[static_cast<std::size_t>(step) % drift.size()];
}

std::mt19937_64 NoiseStreams::stream(NoiseChannel channel, std::int64_t step,
                                     std::size_t worker) const {
  const auto ustep = static_cast<std::uint64_t>(step);
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(channel), static_cast<std::uint32_t>(ustep),
                    static_cast<std::uint32_t>(ustep >> 32),
                    static_cast<std::uint32_t>(worker)};
  return std::mt19937_64(seq);
}

PlantStepOutput plant_step(const PlantConfig& plant, const PlantState& state,
                           const Setpoints& setpoints, std::int64_t step,
                           const NoiseStreams& noise, bool occupied) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const ModelSet& truth = plant.truth;
  const std::size_t workers = state.dl.size();

  PlantStepOutput out;
  PlantState& next = out.next;

  // Draws happen unconditionally so every stream position is arm-independent.
  auto env = noise.stream(NoiseChannel::Environment, step, 0);
  const double z_temp = gauss(env);
  const double z_illum = gauss(env);

  double temp = predict_idt(truth.idt, state.temp, setpoints.temp);
  temp = temp + plant.ambient_pull * (plant.ambient_temp - temp);
  next.temp = temp + plant.temp_disturbance_sd * z_temp;
  next.illum = detail::positive_part(predict_ami(truth.ami, state.illum, setpoints.illum) +
                                     plant.illum_disturbance_sd * z_illum);

  const Increments dt = increments(next.temp, state.temp);
  const Increments dl_env = increments(next.illum, state.illum);

  next.dl.resize(workers);
  next.dl_prev.resize(workers);
  next.effort.resize(workers);
  out.instants.assign(workers, std::vector<double>(plant.substeps));
  std::vector<double> z(plant.substeps);

  for (std::size_t i = 0; i < workers; ++i) {
    auto rng = noise.stream(NoiseChannel::Drowsiness, step, i);
    const double z_step = gauss(rng);
    double z_mean = 0.0;
    for (auto& zk : z) {
      zk = gauss(rng);
      z_mean += zk;
    }
    z_mean /= static_cast<double>(z.size());

    if (!occupied) {
      next.dl[i] = state.dl[i];
      next.dl_prev[i] = state.dl_prev[i];
      next.effort[i] = state.effort[i];
      std::fill(out.instants[i].begin(), out.instants[i].end(), state.dl[i]);
      continue;
    }

    const Increments dd = increments(state.dl[i], state.dl_prev[i]);
    const DlFeatures x{state.dl[i], dd.plus,     dd.minus,     next.temp,
                       dt.plus,     dt.minus,    next.illum,   dl_env.plus,
                       dl_env.minus, state.effort[i]};
    const double base = detail::clamp_dl(dl_regression(truth.dl, x) + plant.drift_at(step) +
                                         plant.dl_noise_sd * z_step);
    for (std::size_t k = 0; k < z.size(); ++k) {
      out.instants[i][k] = detail::clamp_dl(base + plant.instant_sd * (z[k] - z_mean));
    }
    const MeanSd ms = mean_and_sd(out.instants[i]);
    next.dl[i] = std::clamp(ms.mean, kDlMin, kDlMax);
    next.dl_prev[i] = state.dl[i];
    next.effort[i] = ms.sd;
  }
  return out;
}

bool ScenarioConfig::occupied(std::int64_t step) const {
  if (!lunch_start) return true;
  const auto from = static_cast<std::int64_t>(*lunch_start);
  return step < from || step >= from + static_cast<std::int64_t>(lunch_steps);
}

void ScenarioConfig::validate() const {
  if (steps < 1) throw Error(ErrorCode::InvalidValue, "steps must be >= 1", "steps");
  validate_config(mpc);
  de.validate();
  plant.validate();
  if (model_mismatch) controller_models.validate();
  if (initial_dl.size() != 1 && initial_dl.size() != mpc.num_workers) {
    throw Error(ErrorCode::ShapeMismatch, "initial_dl needs 1 or num_workers values",
                "initial_dl");
  }
  for (double d : initial_dl) DrowsinessLevel{d};
  const double t0 = initial_temp.value_or(mpc.temp_comfort);
  const double l0 = initial_illum.value_or(mpc.illum_comfort);
  if (!(t0 >= 0.0 && t0 <= 50.0)) {
    throw Error(ErrorCode::InvalidValue, "initial_temp outside [0, 50]", "initial_temp");
  }
  if (!(l0 >= 0.0 && l0 <= 10000.0)) {
    throw Error(ErrorCode::InvalidValue, "initial_illum outside [0, 10000]", "initial_illum");
  }
}

Metrics compute_metrics(const SimTrace& trace) {
  Metrics m;
  if (trace.steps.empty()) return m;
  double dl_sum = 0.0;
  std::size_t dl_count = 0;
  std::size_t violations = 0;
  double temp_dev = 0.0, illum_dev = 0.0;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const TraceStep& s = trace.steps[k];
    if (s.occupied) {
      for (double d : s.dl) dl_sum += d;
      dl_count += s.dl.size();
    }
    if (s.penalty > trace.comfort.penalty_cap) ++violations;
    temp_dev += std::abs(s.temp - trace.comfort.temp_comfort);
    illum_dev += std::abs(s.illum - trace.comfort.illum_comfort);
    if (k > 0 && (s.temp_set != trace.steps[k - 1].temp_set ||
                  s.illum_set != trace.steps[k - 1].illum_set)) {
      ++m.setpoint_change_count;
    }
  }
  const auto n = static_cast<double>(trace.steps.size());
  m.mean_dl = dl_count ? dl_sum / static_cast<double>(dl_count)
                       : std::numeric_limits<double>::quiet_NaN();
  m.comfort_violation_rate = static_cast<double>(violations) / n;
  m.mean_abs_temp_dev = temp_dev / n;
  m.mean_abs_illum_dev = illum_dev / n;
  return m;
}

namespace {

void feed(const PlantState& state, const std::vector<std::vector<double>>& instants,
          std::int64_t step, StepAggregator& agg, std::vector<InstantSample>* sink) {
  const std::size_t substeps = instants.empty() ? 0 : instants.front().size();
  for (std::size_t k = 0; k < substeps; ++k) {
    for (std::size_t i = 0; i < instants.size(); ++i) {
      agg.add(i, instants[i][k], state.temp, state.illum);
      if (sink) sink->push_back({step, k, i, instants[i][k], state.temp, state.illum});
    }
  }
}

void record_telemetry(TelemetryTable& table, const PlantState& state, const Setpoints& sp,
                      std::int64_t step) {
  for (std::size_t i = 0; i < state.dl.size(); ++i) {
    table.rows.push_back({step, "w" + std::to_string(i), state.dl[i], state.effort[i],
                          state.temp, state.illum, sp.temp, sp.illum});
  }
}

}  // namespace

SimResult run_scenario(const ScenarioConfig& sc) {
  sc.validate();
  const std::size_t workers = sc.mpc.num_workers;
  const NoiseStreams noise(sc.seed);
  const ModelSet& controller_models = sc.model_mismatch ? sc.controller_models : sc.plant.truth;
  Controller controller(controller_models, sc.mpc, sc.de);
  StepAggregator agg(workers);

  SimResult result;
  result.trace.mode = sc.mode();
  result.trace.seed = sc.seed;
  result.trace.workers = workers;
  result.trace.comfort = detail::ComfortParams::from(sc.mpc);

  PlantState state;
  state.temp = sc.initial_temp.value_or(sc.mpc.temp_comfort);
  state.illum = sc.initial_illum.value_or(sc.mpc.illum_comfort);
  for (std::size_t i = 0; i < workers; ++i) {
    state.dl.push_back(sc.initial_dl.size() == 1 ? sc.initial_dl[0] : sc.initial_dl[i]);
  }
  state.dl_prev = state.dl;
  state.effort.assign(workers, 0.0);

  std::vector<std::vector<double>> initial_instants(workers);
  for (std::size_t i = 0; i < workers; ++i) {
    initial_instants[i].assign(sc.plant.substeps, state.dl[i]);
  }
  feed(state, initial_instants, 0, agg, &result.samples);
  controller.observe(agg.finish(0));
  if (sc.occupied(0)) record_telemetry(result.telemetry, state, controller.held(), 0);

  const auto steps = static_cast<std::int64_t>(sc.steps);
  for (std::int64_t n = 0; n < steps; ++n) {
    const std::int64_t next_step = n + 1;
    TraceStep row;
    row.step = next_step;

    Setpoints sp;
    if (sc.excitation) {
      auto rng = noise.stream(NoiseChannel::Excitation, next_step, 0);
      std::uniform_real_distribution<double> temp_dist(sc.mpc.temp_lo, sc.mpc.temp_hi);
      std::uniform_real_distribution<double> illum_dist(sc.mpc.illum_lo, sc.mpc.illum_hi);
      sp.temp = temp_dist(rng);
      sp.illum = illum_dist(rng);
    } else {
      ControllerOutput out = controller.step(n);
      sp = out.setpoints;
      row.feasible = out.feasible;
      row.stale = out.status == ControllerStatus::Stale;
      if (out.solution) {
        const HorizonPrediction& pred = out.solution->predicted;
        row.predicted_temp = pred.temps.front();
        row.predicted_illum = pred.illums.front();
        for (std::size_t i = 0; i < workers; ++i) row.predicted_dl.push_back(pred.dl(i, 0));
      }
    }

    const bool occupied = sc.occupied(next_step);
    PlantStepOutput stepped = plant_step(sc.plant, state, sp, next_step, noise, occupied);
    state = std::move(stepped.next);

    row.temp_set = sp.temp;
    row.illum_set = sp.illum;
    row.temp = state.temp;
    row.illum = state.illum;
    row.penalty = comfort_penalty(state.temp, state.illum, sc.mpc);
    row.occupied = occupied;
    row.dl = state.dl;
    row.effort = state.effort;
    result.trace.steps.push_back(std::move(row));

    feed(state, stepped.instants, next_step, agg,
         next_step < steps ? &result.samples : nullptr);
    controller.observe(agg.finish(next_step));
    if (occupied) record_telemetry(result.telemetry, state, sp, next_step);
  }

  result.metrics = compute_metrics(result.trace);
  return result;
}

std::vector<ArmSpec> default_arms() {
  return {{"NOC", ControlMode::NOC}, {"MPC1", ControlMode::MPC1}, {"MPC2", ControlMode::MPC2}};
}

std::vector<double> ArmComparison::paired_dl_delta(std::size_t a, std::size_t b) const {
  std::vector<double> out;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    out.push_back(arms.at(a).per_seed.at(s).mean_dl - arms.at(b).per_seed.at(s).mean_dl);
  }
  return out;
}

ArmComparison compare_arms(const ScenarioConfig& base, const std::vector<std::uint64_t>& seeds,
                           const std::vector<ArmSpec>& arms, unsigned threads) {
  base.validate();
  ArmComparison cmp;
  cmp.seeds = seeds;
  for (const auto& arm : arms) {
    ArmSummary summary;
    summary.arm = arm;
    summary.per_seed.resize(seeds.size());
    cmp.arms.push_back(std::move(summary));
  }

  const std::size_t jobs = seeds.size() * arms.size();
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t a = j % arms.size();
      const std::size_t s = j / arms.size();
      ScenarioConfig sc = base;
      sc.seed = seeds[s];
      sc.mpc.mode = arms[a].mode;
      cmp.arms[a].per_seed[s] = run_scenario(sc).metrics;
    }
  };
  unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(jobs, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
  }

  for (auto& summary : cmp.arms) {
    const auto n = static_cast<double>(summary.per_seed.size());
    if (n == 0.0) continue;
    for (const Metrics& m : summary.per_seed) {
      summary.mean_dl += m.mean_dl;
      summary.comfort_violation_rate += m.comfort_violation_rate;
      summary.mean_abs_temp_dev += m.mean_abs_temp_dev;
      summary.mean_abs_illum_dev += m.mean_abs_illum_dev;
      summary.setpoint_change_count += static_cast<double>(m.setpoint_change_count);
    }
    summary.mean_dl /= n;
    summary.comfort_violation_rate /= n;
    summary.mean_abs_temp_dev /= n;
    summary.mean_abs_illum_dev /= n;
    summary.setpoint_change_count /= n;
  }
  return cmp;
}

}  // namespace dmpc

#include "dmpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dmpc/kernels.hpp"

namespace dmpc {

Minimizer default_minimizer() {
  return [](const BatchEvaluator& eval, std::span<const double> lo, std::span<const double> hi,
            const DeParams& p) { return de_minimize(eval, lo, hi, p); };
}

namespace {

MpcSolution finish(const ModelSet& models, const StateSnapshot& snapshot, const MpcConfig& cfg,
                   ControlSchedule schedule, std::size_t generations) {
  HorizonPrediction pred = rollout(models, snapshot, schedule, cfg);
  const double violation = constraint_violation(pred, cfg);
  const double value = objective(pred);
  const Setpoints applied{schedule.temp_setpoints().front(), schedule.illum_setpoints().front()};
  return MpcSolution{std::move(schedule), std::move(pred), value, violation,
                     violation == 0.0, applied, generations};
}

}  // namespace

MpcSolution solve(const ModelSet& models, const StateSnapshot& snapshot, const MpcConfig& cfg,
                  const DeParams& de, const Minimizer& minimizer) {
  validate_config(cfg);
  models.validate();
  snapshot.validate();
  if (snapshot.workers.size() != cfg.num_workers) {
    throw Error(ErrorCode::ShapeMismatch, "snapshot worker count differs from cfg.num_workers",
                "num_workers");
  }

  const std::size_t h = cfg.horizon;
  if (cfg.mode == ControlMode::NOC) {
    return finish(models, snapshot, cfg,
                  ControlSchedule::constant(h, cfg.temp_comfort, cfg.illum_comfort), 0);
  }

  const bool pin_illum = cfg.mode == ControlMode::MPC1;
  const std::size_t dim = pin_illum ? h : 2 * h;
  std::vector<double> lower(dim), upper(dim);
  for (std::size_t t = 0; t < h; ++t) {
    lower[t] = cfg.temp_lo;
    upper[t] = cfg.temp_hi;
    if (!pin_illum) {
      lower[h + t] = cfg.illum_lo;
      upper[h + t] = cfg.illum_hi;
    }
  }

  const kernels::RolloutProblem problem{&models, &snapshot,
                                        detail::ComfortParams::from(cfg), h};
  std::vector<double> soa;
  const BatchEvaluator evaluate = [&](const CandidateBatch& batch, std::span<double> obj,
                                      std::span<double> viol) {
    const std::size_t n = batch.count;
    soa.resize(2 * h * n);
    for (std::size_t c = 0; c < n; ++c) {
      const auto row = batch.row(c);
      for (std::size_t t = 0; t < h; ++t) {
        soa[t * n + c] = row[t];
        soa[(h + t) * n + c] = pin_illum ? cfg.illum_comfort : row[h + t];
      }
    }
    kernels::evaluate_schedules(problem, soa, n, obj, viol);
  };

  const DeResult res = minimizer(evaluate, lower, upper, de);

  std::vector<double> temps(res.best_vector.begin(), res.best_vector.begin() + h);
  std::vector<double> illums =
      pin_illum ? std::vector<double>(h, cfg.illum_comfort)
                : std::vector<double>(res.best_vector.begin() + h, res.best_vector.end());
  return finish(models, snapshot, cfg, ControlSchedule(std::move(temps), std::move(illums)),
                res.generations_used);
}

MeanSd mean_and_sd(std::span<const double> samples) {
  if (samples.empty()) {
    return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  }
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(samples.size());
  if (samples.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(samples.size()))};
}

StepAggregator::StepAggregator(std::size_t num_workers) : dl_(num_workers) {}

void StepAggregator::add(std::size_t worker, double dl, double temp, double illum) {
  if (worker >= dl_.size()) {
    throw Error(ErrorCode::InvalidValue, "worker index out of range", "worker");
  }
  dl_[worker].push_back(dl);
  temps_.push_back(temp);
  illums_.push_back(illum);
}

bool StepAggregator::complete() const noexcept {
  for (const auto& w : dl_) {
    if (w.empty()) return false;
  }
  return !dl_.empty();
}

StepMeasurement StepAggregator::finish(std::int64_t step) {
  StepMeasurement m;
  m.step = step;
  m.temp = mean_and_sd(temps_).mean;
  m.illum = mean_and_sd(illums_).mean;
  m.dl.reserve(dl_.size());
  m.effort.reserve(dl_.size());
  for (auto& samples : dl_) {
    const MeanSd s = mean_and_sd(samples);
    m.dl.push_back(s.mean);
    m.effort.push_back(s.sd);
    samples.clear();
  }
  temps_.clear();
  illums_.clear();
  return m;
}

Controller::Controller(ModelSet models, MpcConfig cfg, DeParams de, Minimizer minimizer)
    : models_(std::move(models)),
      cfg_(cfg),
      de_(de),
      minimizer_(std::move(minimizer)),
      held_{cfg.temp_comfort, cfg.illum_comfort} {
  validate_config(cfg_);
  models_.validate();
  de_.validate();
}

void Controller::observe(StepMeasurement m) {
  if (m.dl.size() != cfg_.num_workers || m.effort.size() != cfg_.num_workers) {
    throw Error(ErrorCode::ShapeMismatch, "measurement worker count differs from config",
                "num_workers");
  }
  if (!history_.empty() && m.step <= history_.back().step) {
    throw Error(ErrorCode::InvalidValue, "measurements must arrive in increasing step order",
                "step");
  }
  history_.push_back(std::move(m));
  while (history_.size() > 2) history_.pop_front();
}

StateSnapshot Controller::snapshot() const {
  if (history_.empty()) {
    throw Error(ErrorCode::InsufficientData, "controller has no measurements");
  }
  const StepMeasurement& now = history_.back();
  const StepMeasurement* before = nullptr;
  if (history_.size() == 2 && history_.front().step == now.step - 1) before = &history_.front();

  StateSnapshot snap;
  snap.temp_current = now.temp;
  snap.illum_current = now.illum;
  snap.workers.reserve(now.dl.size());
  for (std::size_t i = 0; i < now.dl.size(); ++i) {
    // Means of in-range samples can round a hair past the scale ends.
    const double cur = std::clamp(now.dl[i], kDlMin, kDlMax);
    const double prev = before ? std::clamp(before->dl[i], kDlMin, kDlMax) : cur;
    snap.workers.push_back(WorkerState::from_history(cur, prev, now.effort[i]));
  }
  return snap;
}

ControllerOutput Controller::step(std::int64_t clock) {
  const bool fresh = !history_.empty() && history_.back().step == clock &&
                     std::none_of(history_.back().dl.begin(), history_.back().dl.end(),
                                  [](double d) { return std::isnan(d); });
  if (!fresh) {
    return ControllerOutput{ControllerStatus::Stale, held_, true, std::nullopt};
  }
  DeParams de = de_;
  de.seed = de_.seed + static_cast<std::uint64_t>(clock);
  MpcSolution sol = solve(models_, snapshot(), cfg_, de, minimizer_);
  held_ = sol.applied;
  const bool feasible = sol.feasible;
  return ControllerOutput{ControllerStatus::Ok, held_, feasible, std::move(sol)};
}

}  // namespace dmpc

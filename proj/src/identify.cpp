#include "dmpc/identify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include "dmpc/models.hpp"

namespace dmpc {

namespace {

constexpr double kMinGain = 1e-6;
constexpr double kRankThreshold = 1e-10;

void require(bool ok, const std::string& what, const char* field) {
  if (!ok) throw Error(ErrorCode::InvalidValue, what, field);
}

struct OlsResult {
  double intercept = 0.0;
  Eigen::VectorXd beta;
  FitReport report;
};

// Least squares with intercept on mean-centred, unit-norm regressors.
// Centring makes the minimum-norm solution put a constant target entirely
// into the intercept.
OlsResult solve_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  Eigen::MatrixXd xs = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::VectorXd scale(p);
  bool dropped = false;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = xs.col(j).norm();
    const double ref = std::max(1.0, x.col(j).norm());
    if (norm <= 1e-12 * ref) {
      scale(j) = 0.0;
      xs.col(j).setZero();
      dropped = true;
    } else {
      scale(j) = norm;
      xs.col(j) /= norm;
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankThreshold);
  const auto rank = static_cast<Eigen::Index>(svd.rank());
  Eigen::VectorXd b;
  if (ridge > 0.0) {
    const Eigen::MatrixXd gram =
        xs.transpose() * xs + ridge * Eigen::MatrixXd::Identity(p, p);
    b = gram.ldlt().solve(xs.transpose() * yc);
  } else {
    b = svd.solve(yc);
  }

  OlsResult out;
  out.beta = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (scale(j) > 0.0) out.beta(j) = b(j) / scale(j);
  }
  out.intercept = y_mean - x_mean.dot(out.beta);

  const Eigen::VectorXd resid = y - x * out.beta - Eigen::VectorXd::Constant(n, out.intercept);
  const double rss = resid.squaredNorm();
  out.report.rmse = std::sqrt(rss / static_cast<double>(n));
  out.report.n_samples = static_cast<std::size_t>(n);
  out.report.rank = static_cast<std::size_t>(rank) + 1;
  out.report.condition_warning = dropped || rank < p;

  const Eigen::Index dof = n - rank - 1;
  if (dof > 0 && ridge == 0.0) {
    const double sigma2 = rss / static_cast<double>(dof);
    const auto& sv = svd.singularValues();
    const auto& v = svd.matrixV();
    const double cutoff = kRankThreshold * (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::MatrixXd cov_scaled = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > cutoff) cov_scaled += v.col(k) * v.col(k).transpose() / (sv(k) * sv(k));
    }
    Eigen::MatrixXd cov_beta = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (scale(i) > 0.0 && scale(j) > 0.0) {
          cov_beta(i, j) = sigma2 * cov_scaled(i, j) / (scale(i) * scale(j));
        }
      }
    }
    const double var_intercept =
        sigma2 / static_cast<double>(n) + x_mean * cov_beta * x_mean.transpose();
    out.report.std_errors.push_back(std::sqrt(std::max(var_intercept, 0.0)));
    for (Eigen::Index j = 0; j < p; ++j) {
      out.report.std_errors.push_back(std::sqrt(std::max(cov_beta(j, j), 0.0)));
    }
  }
  return out;
}

// Rows of each worker in table order, workers in order of first appearance.
std::vector<std::vector<const TelemetryRow*>> by_worker(const TelemetryTable& data) {
  std::vector<std::vector<const TelemetryRow*>> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : data.rows) {
    auto [it, inserted] = index.emplace(r.worker_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&r);
  }
  return groups;
}

// Room-level series keyed by step; the first row seen for a step wins.
std::map<std::int64_t, const TelemetryRow*> by_step(const TelemetryTable& data) {
  std::map<std::int64_t, const TelemetryRow*> steps;
  for (const auto& r : data.rows) steps.emplace(r.step_index, &r);
  return steps;
}

}  // namespace

void TelemetryTable::validate() const {
  for (const auto& group : by_worker(*this)) {
    for (std::size_t k = 1; k < group.size(); ++k) {
      require(group[k]->step_index > group[k - 1]->step_index,
              "step_index must be strictly increasing for worker " + group[k]->worker_id,
              "step");
    }
  }
  for (const auto& r : rows) {
    require(r.dl >= kDlMin && r.dl <= kDlMax, "dl outside [1, 5]", "dl");
    require(r.effort >= 0.0 && std::isfinite(r.effort), "effort must be >= 0", "effort");
    require(std::isfinite(r.temp) && std::isfinite(r.temp_set), "temperature not finite",
            "temp_c");
    require(std::isfinite(r.illum) && std::isfinite(r.illum_set), "illuminance not finite",
            "illum_lx");
  }
}

DlFit fit_dl_model(const TelemetryTable& data, const FitOptions& options) {
  data.validate();
  std::vector<std::array<double, kDlFeatureCount>> rows;
  std::vector<double> target;
  for (const auto& group : by_worker(data)) {
    for (std::size_t k = 2; k < group.size(); ++k) {
      const TelemetryRow& now = *group[k];
      const TelemetryRow& prev = *group[k - 1];
      const TelemetryRow& prev2 = *group[k - 2];
      if (prev.step_index != now.step_index - 1 || prev2.step_index != now.step_index - 2) {
        continue;
      }
      if (options.exclude_boundary_dl && (now.dl == kDlMin || now.dl == kDlMax)) continue;
      const Increments d = increments(prev.dl, prev2.dl);
      const Increments tp = increments(now.temp, prev.temp);
      const Increments il = increments(now.illum, prev.illum);
      rows.push_back({prev.dl, d.plus, d.minus, now.temp, tp.plus, tp.minus, now.illum, il.plus,
                      il.minus, prev.effort});
      target.push_back(now.dl);
    }
  }
  if (rows.size() < kDlFeatureCount + 1) {
    throw Error(ErrorCode::InsufficientData,
                "DL fit needs at least 11 samples with two preceding steps, got " +
                    std::to_string(rows.size()));
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), kDlFeatureCount);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < kDlFeatureCount; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    y(static_cast<Eigen::Index>(i)) = target[i];
  }
  OlsResult ols = solve_ols(x, y, options.ridge);

  DlFit fit;
  fit.model.intercept = ols.intercept;
  for (std::size_t j = 0; j < kDlFeatureCount; ++j) {
    fit.model.coef[j] = ols.beta(static_cast<Eigen::Index>(j));
  }
  fit.report = std::move(ols.report);
  return fit;
}

IdtFit fit_idt_coeffs(const TelemetryTable& data) {
  data.validate();
  struct Branch {
    double num = 0.0, den = 0.0;
    std::vector<std::array<double, 3>> samples;  // prev, setpoint, realized
  } up, down;

  const auto steps = by_step(data);
  for (auto it = steps.begin(); it != steps.end(); ++it) {
    const auto next = std::next(it);
    if (next == steps.end() || next->first != it->first + 1) continue;
    const double prev = it->second->temp;
    const double set = next->second->temp_set;
    const double out = next->second->temp;
    Branch& b = set >= prev ? up : down;
    b.num += (out - prev) * (set - prev);
    b.den += (set - prev) * (set - prev);
    b.samples.push_back({prev, set, out});
  }
  if (up.samples.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "fewer than 2 raising transitions", "raising");
  }
  if (down.samples.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "fewer than 2 lowering transitions", "lowering");
  }

  IdtFit fit;
  auto gain = [](const Branch& b) {
    const double k = b.den > 0.0 ? b.num / b.den : 1.0;
    return std::clamp(k, kMinGain, 1.0);
  };
  fit.model.k_up = gain(up);
  fit.model.k_down = gain(down);

  double rss = 0.0;
  for (const Branch* b : {&up, &down}) {
    const double k = b == &up ? fit.model.k_up : fit.model.k_down;
    double branch_rss = 0.0;
    for (const auto& s : b->samples) {
      const double r = s[2] - (k * s[1] + (1.0 - k) * s[0]);
      branch_rss += r * r;
    }
    rss += branch_rss;
    const double se = b->den > 0.0 ? std::sqrt(branch_rss /
                                               static_cast<double>(b->samples.size() - 1) /
                                               b->den)
                                   : 0.0;
    fit.report.std_errors.push_back(se);
  }
  fit.report.n_samples = up.samples.size() + down.samples.size();
  fit.report.rmse = std::sqrt(rss / static_cast<double>(fit.report.n_samples));
  fit.report.rank = (up.den > 0.0 ? 1 : 0) + (down.den > 0.0 ? 1 : 0);
  fit.report.condition_warning = fit.report.rank < 2;
  return fit;
}

AmiFit fit_ami_model(const TelemetryTable& data, const FitOptions& options) {
  data.validate();
  std::vector<std::array<double, 3>> samples;  // prev, setpoint, realized
  const auto steps = by_step(data);
  for (auto it = steps.begin(); it != steps.end(); ++it) {
    const auto next = std::next(it);
    if (next == steps.end() || next->first != it->first + 1) continue;
    samples.push_back({it->second->illum, next->second->illum_set, next->second->illum});
  }
  if (samples.size() < 3) {
    throw Error(ErrorCode::InsufficientData,
                "illuminance fit needs at least 3 consecutive-step samples");
  }
  const bool swept = std::any_of(samples.begin(), samples.end(),
                                 [&](const auto& s) { return s[1] != samples.front()[1]; });
  if (!swept) {
    throw Error(ErrorCode::DegenerateSweep, "illuminance setpoint never changes", "illum_set_lx");
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = samples[i][0];
    x(r, 1) = samples[i][1];
    y(r) = samples[i][2];
  }
  OlsResult ols = solve_ols(x, y, options.ridge);
  AmiFit fit;
  fit.model.theta0 = ols.intercept;
  fit.model.theta_prev = ols.beta(0);
  fit.model.theta_set = ols.beta(1);
  fit.report = std::move(ols.report);
  return fit;
}

}  // namespace dmpc

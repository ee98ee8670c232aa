#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dmpc/domain.hpp"

namespace dmpc {

struct TelemetryRow {
  std::int64_t step_index = 0;
  std::string worker_id;
  double dl = 1.0;
  double effort = 0.0;
  double temp = 0.0;
  double illum = 0.0;
  double temp_set = 0.0;
  double illum_set = 0.0;
};

struct TelemetryTable {
  std::vector<TelemetryRow> rows;

  /// Throws InvalidValue if a worker's step_index is not strictly increasing
  /// or a value is out of range.
  void validate() const;
};

struct FitReport {
  double rmse = 0.0;
  std::size_t n_samples = 0;
  std::size_t rank = 0;
  bool condition_warning = false;
  /// Per-coefficient standard errors in the order intercept, then features.
  /// Empty when the residual degrees of freedom are zero.
  std::vector<double> std_errors;
};

struct FitOptions {
  /// Drop samples whose target DL sits on a scale end (1 or 5); such values
  /// are likely clamped and bias the regression.
  bool exclude_boundary_dl = true;
  double ridge = 0.0;
};

struct DlFit {
  DlModel model;
  FitReport report;
};

struct IdtFit {
  IdtModel model;
  FitReport report;
};

struct AmiFit {
  AmiModel model;
  FitReport report;
};

/// Least squares over the ten DL regressors plus intercept. A sample for
/// step t of a worker needs rows t-2, t-1, t. The effort regressor is the
/// previous step's effort, the value a controller holds during the horizon.
/// Collinear regressors give the minimum-norm solution with
/// condition_warning set. Throws InsufficientData below 11 samples.
DlFit fit_dl_model(const TelemetryTable& data, const FitOptions& options = {});

/// Closed-form one-parameter least squares for k_up over raising
/// transitions (setpoint >= previous temperature) and k_down over lowering
/// ones, clipped to (0, 1]. Throws InsufficientData naming the branch with
/// fewer than two transitions.
IdtFit fit_idt_coeffs(const TelemetryTable& data);

/// Least squares for (theta0, theta_prev, theta_set). Throws
/// InsufficientData below 3 samples, DegenerateSweep if the setpoint never
/// changes.
AmiFit fit_ami_model(const TelemetryTable& data, const FitOptions& options = {});

}  // namespace dmpc

#include <gtest/gtest.h>

#include <random>

#include "dmpc/identify.hpp"
#include "support/fixtures.hpp"

namespace dmpc {
namespace {

void expect_dl_near(const DlModel& got, const DlModel& want, double tol) {
  EXPECT_NEAR(got.intercept, want.intercept, tol);
  for (std::size_t j = 0; j < kDlFeatureCount; ++j) {
    EXPECT_NEAR(got.coef[j], want.coef[j], tol) << kDlFeatureNames[j];
  }
}

TEST(FitDlModel, RecoversNoiselessCoefficients) {
  std::mt19937_64 rng(1);
  const ModelSet truth = testing::random_plant_models(rng);
  const auto table = testing::synthetic_telemetry(truth, 5, 60, 0.0, rng);
  const auto fit = fit_dl_model(table);
  expect_dl_near(fit.model, truth.dl, 1e-8);
  EXPECT_LT(fit.report.rmse, 1e-9);
  EXPECT_EQ(fit.report.rank, 11u);
  EXPECT_FALSE(fit.report.condition_warning);
  EXPECT_EQ(fit.report.std_errors.size(), 11u);
}

TEST(FitDlModel, RoundTripProperty) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelSet truth = testing::random_plant_models(rng);
    const auto table = testing::synthetic_telemetry(truth, 4, 40, 0.0, rng);
    const auto fit = fit_dl_model(table);
    expect_dl_near(fit.model, truth.dl, 1e-6);
  }
}

TEST(FitDlModel, ConstantTargetGoesToIntercept) {
  std::mt19937_64 rng(3);
  auto table = testing::synthetic_telemetry(testing::fixture_models(), 3, 30, 0.0, rng);
  for (auto& r : table.rows) r.dl = 2.0;
  const auto fit = fit_dl_model(table);
  EXPECT_NEAR(fit.model.intercept, 2.0, 1e-9);
  for (double c : fit.model.coef) EXPECT_NEAR(c, 0.0, 1e-9);
  EXPECT_TRUE(fit.report.condition_warning);
}

TEST(FitDlModel, TooFewSamples) {
  std::mt19937_64 rng(4);
  // One worker, seven steps: five usable samples.
  const auto table = testing::synthetic_telemetry(testing::fixture_models(), 1, 7, 0.0, rng);
  try {
    fit_dl_model(table);
    FAIL() << "expected InsufficientData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(FitDlModel, SkipsGapsInStepIndex) {
  std::mt19937_64 rng(5);
  const ModelSet truth = testing::random_plant_models(rng);
  auto table = testing::synthetic_telemetry(truth, 3, 50, 0.0, rng);
  // Remove step 20 for every worker; samples spanning the gap must be skipped.
  std::erase_if(table.rows, [](const TelemetryRow& r) { return r.step_index == 20; });
  const auto fit = fit_dl_model(table);
  expect_dl_near(fit.model, truth.dl, 1e-8);
}

TEST(FitDlModel, RejectsOutOfOrderSteps) {
  std::mt19937_64 rng(6);
  auto table = testing::synthetic_telemetry(testing::fixture_models(), 1, 20, 0.0, rng);
  std::swap(table.rows[3], table.rows[4]);
  EXPECT_THROW(fit_dl_model(table), Error);
}

TEST(FitIdt, SetpointTrackingGivesUnitGain) {
  std::mt19937_64 rng(7);
  ModelSet m = testing::fixture_models();
  m.idt = {1.0, 1.0};
  const auto table = testing::synthetic_telemetry(m, 1, 40, 0.0, rng);
  const auto fit = fit_idt_coeffs(table);
  EXPECT_DOUBLE_EQ(fit.model.k_up, 1.0);
  EXPECT_DOUBLE_EQ(fit.model.k_down, 1.0);
}

TEST(FitIdt, RecoversAsymmetricGains) {
  std::mt19937_64 rng(8);
  ModelSet m = testing::fixture_models();
  m.idt = {0.35, 0.8};
  const auto table = testing::synthetic_telemetry(m, 2, 60, 0.0, rng);
  const auto fit = fit_idt_coeffs(table);
  EXPECT_NEAR(fit.model.k_up, 0.35, 1e-12);
  EXPECT_NEAR(fit.model.k_down, 0.8, 1e-12);
}

TEST(FitIdt, OnlyRaisingTransitionsNamesMissingBranch) {
  TelemetryTable table;
  double temp = 20.0;
  for (int t = 0; t < 10; ++t) {
    table.rows.push_back({t, "w0", 2.0, 0.0, temp, 600.0, temp + 2.0, 600.0});
    temp += 1.0;
  }
  try {
    fit_idt_coeffs(table);
    FAIL() << "expected InsufficientData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
    EXPECT_EQ(e.field(), "lowering");
  }
}

TEST(FitIdt, GainsAlwaysClippedIntoUnitInterval) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> set(24.0, 28.0), k(-0.5, 1.8);
  for (int trial = 0; trial < 200; ++trial) {
    // Arbitrary (even non-physical) responses; the fit must stay in (0, 1].
    const double ku = k(rng), kd = k(rng);
    TelemetryTable table;
    double temp = 26.0;
    for (int t = 0; t < 30; ++t) {
      const double s = set(rng);
      const double g = s >= temp ? ku : kd;
      temp = g * s + (1 - g) * temp;
      table.rows.push_back({t, "w0", 2.0, 0.0, temp, 600.0, s, 600.0});
    }
    try {
      const auto fit = fit_idt_coeffs(table);
      EXPECT_GT(fit.model.k_up, 0.0);
      EXPECT_LE(fit.model.k_up, 1.0);
      EXPECT_GT(fit.model.k_down, 0.0);
      EXPECT_LE(fit.model.k_down, 1.0);
      EXPECT_NO_THROW(fit.model.validate());
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
    }
  }
}

TEST(FitAmi, IdentityResponse) {
  std::mt19937_64 rng(10);
  ModelSet m = testing::fixture_models();
  m.ami = {0.0, 0.0, 1.0};
  const auto table = testing::synthetic_telemetry(m, 1, 30, 0.0, rng);
  const auto fit = fit_ami_model(table);
  EXPECT_NEAR(fit.model.theta0, 0.0, 1e-8);
  EXPECT_NEAR(fit.model.theta_prev, 0.0, 1e-10);
  EXPECT_NEAR(fit.model.theta_set, 1.0, 1e-10);
}

TEST(FitAmi, RecoversCoefficients) {
  std::mt19937_64 rng(11);
  ModelSet m = testing::fixture_models();
  m.ami = {35.0, 0.15, 0.8};
  const auto table = testing::synthetic_telemetry(m, 1, 30, 0.0, rng);
  const auto fit = fit_ami_model(table);
  EXPECT_NEAR(fit.model.theta0, 35.0, 1e-7);
  EXPECT_NEAR(fit.model.theta_prev, 0.15, 1e-10);
  EXPECT_NEAR(fit.model.theta_set, 0.8, 1e-10);
}

TEST(FitAmi, ConstantSetpointIsDegenerate) {
  TelemetryTable table;
  for (int t = 0; t < 10; ++t) table.rows.push_back({t, "w0", 2.0, 0.0, 26.0, 600.0, 26.0, 600.0});
  try {
    fit_ami_model(table);
    FAIL() << "expected DegenerateSweep";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSweep);
  }
}

TEST(FitAmi, TooFewSamples) {
  TelemetryTable table;
  for (int t = 0; t < 3; ++t) {
    table.rows.push_back({t, "w0", 2.0, 0.0, 26.0, 500.0 + t, 26.0, 500.0 + 10 * t});
  }
  try {
    fit_ami_model(table);
    FAIL() << "expected InsufficientData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

}  // namespace
}  // namespace dmpc

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varkde/models.hpp"
#include "varkde/spa.hpp"
#include "varkde/timeseries.hpp"

namespace varkde::backtest {

struct ViolationSeries {
  std::vector<int> flags;  // 1 where r_t < -VaR_t
  double alpha = 0.05;

  std::size_t n() const noexcept { return flags.size(); }
  std::size_t count() const noexcept;
};

/// VaR forecasts are positive loss bounds. Throws LengthMismatch, AlphaOutOfRange.
ViolationSeries violations(std::span<const double> returns, std::span<const double> var, double alpha);

struct LrResult {
  double stat = 0.0;
  double p = 1.0;
};

/// Unconditional coverage, chi-square(1) reference. Throws EmptyInput.
LrResult lr_uc(const ViolationSeries& v);
/// First-order Markov independence, chi-square(1). Needs n >= 2.
LrResult lr_ind(const ViolationSeries& v);
/// lr_uc + lr_ind against chi-square(2).
LrResult lr_cc(const ViolationSeries& v);

struct TestReport {
  std::size_t n = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  double lr_uc = 0.0, p_uc = 1.0;
  double lr_ind = 0.0, p_ind = 1.0;
  double lr_cc = 0.0, p_cc = 1.0;
  double pi01 = 0.0, pi11 = 0.0;
};

TestReport coverage_report(const ViolationSeries& v);

/// 1 + (r_t + VaR_t)^2 on violation days, 0 elsewhere.
std::vector<double> lopez_loss(std::span<const double> returns, std::span<const double> var);

struct BacktestOptions {
  WindowPlan plan;
  std::vector<double> alphas{0.05};
  /// Only windows whose target index lies in [target_begin, target_end) are run.
  std::size_t target_begin = 0;
  std::size_t target_end = static_cast<std::size_t>(-1);
  std::size_t threads = 1;
  spa::SpaOptions spa;
};

struct ModelAlphaReport {
  std::string model;
  double alpha = 0.0;
  std::size_t forecasts = 0;
  TestReport coverage;
  /// SPA p-value with this model as the benchmark, over the windows where every
  /// model produced a forecast. Unset when fewer than two models are present or
  /// too few common windows remain.
  std::optional<double> spa_p;
  double mean_loss = 0.0;
};

struct ModelTrack {
  std::string name;
  std::vector<bool> ok;                  // per window
  std::vector<std::string> errors;       // per window, empty when ok
  std::vector<std::vector<double>> var;  // [alpha][window]
  std::size_t failures() const;
};

struct BacktestResult {
  std::vector<Window> windows;
  std::vector<Date> target_dates;
  std::vector<double> target_returns;
  std::vector<double> alphas;
  std::size_t horizon = 1;
  std::vector<ModelTrack> models;
  std::vector<std::vector<ModelAlphaReport>> reports;  // [alpha][model]
};

/// Fits every model on every window and forecasts the target. Failures are
/// logged and the window is skipped for that model.
BacktestResult run_backtest(const ReturnSeries& series,
                            const std::vector<std::shared_ptr<const models::ForecastModel>>& roster,
                            const BacktestOptions& options);

}  // namespace varkde::backtest

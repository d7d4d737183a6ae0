#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "varkde/hybrid.hpp"
#include "varkde/timeseries.hpp"

namespace varkde::tuning {

struct GridPoint {
  double C = 1.0;
  double psi = 0.5;
  double gamma = 1.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct Grid {
  std::vector<double> C_values;
  std::vector<double> psi_values;
  std::vector<double> gamma_values;

  /// C and gamma in decades 1e-4 .. 1e4, psi in 0, 0.1, ..., 0.9.
  static Grid default_grid();
  /// Throws Config for empty axes or values outside their domain.
  void validate() const;
  /// Cartesian product in C-major, then psi, then gamma order.
  std::vector<GridPoint> points() const;
};

struct PointResult {
  GridPoint point;
  bool failed = false;
  std::string error;  // first failure, when failed
  std::size_t forecasts = 0;
  double violation_rate = 0.0;
  double p_uc = 1.0;
  double p_ind = 1.0;
  double p_cc = 1.0;
};

struct TuningResult {
  std::vector<PointResult> ranked;  // p_cc descending, ties broken deterministically
  std::vector<PointResult> failed;  // grid order
  const PointResult& chosen() const { return ranked.front(); }
};

struct TuningOptions {
  WindowPlan plan;
  double alpha = 0.05;
  std::size_t target_begin = 0;
  std::size_t target_end = static_cast<std::size_t>(-1);
  std::size_t threads = 1;
  /// Result already known for a point (for example from a journal); skips evaluation.
  std::function<std::optional<PointResult>(const GridPoint&)> lookup;
  /// Called after each freshly evaluated point, in grid order.
  std::function<void(const PointResult&)> on_point;
};

/// The hybrid with `base` settings and the point's (C, psi, gamma) applied to
/// both the mean and the variance stages.
hybrid::HybridConfig apply_point(const hybrid::HybridConfig& base, const GridPoint& point);

/// Rolling hybrid backtest at one grid point. A point fails as soon as any
/// window fails to fit.
PointResult evaluate_point(const ReturnSeries& series, const hybrid::HybridConfig& base, const GridPoint& point,
                           const TuningOptions& options);

/// Sorts by p_cc descending; ties prefer smaller C, then smaller gamma, then larger psi.
std::vector<PointResult> rank(std::vector<PointResult> results);

/// Throws AllPointsFailed when no grid point could be evaluated.
TuningResult grid_search(const ReturnSeries& series, const Grid& grid, const hybrid::HybridConfig& base,
                         const TuningOptions& options);

}  // namespace varkde::tuning

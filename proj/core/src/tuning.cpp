#include "varkde/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>

#include "varkde/backtest.hpp"
#include "varkde/error.hpp"
#include "varkde/log.hpp"
#include "varkde/parallel.hpp"

namespace varkde::tuning {

Grid Grid::default_grid() {
  Grid g;
  for (int e = -4; e <= 4; ++e) {
    g.C_values.push_back(std::pow(10.0, e));
    g.gamma_values.push_back(std::pow(10.0, e));
  }
  for (int k = 0; k < 10; ++k) g.psi_values.push_back(k / 10.0);
  return g;
}

void Grid::validate() const {
  if (C_values.empty() || psi_values.empty() || gamma_values.empty())
    throw Error(ErrorCode::Config, "tuning grid axes must be nonempty");
  for (double c : C_values)
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::Config, "grid C values must be positive");
  for (double g : gamma_values)
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorCode::Config, "grid gamma values must be positive");
  for (double p : psi_values)
    if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorCode::Config, "grid psi values must lie in [0, 1)");
}

std::vector<GridPoint> Grid::points() const {
  std::vector<GridPoint> out;
  for (double c : C_values)
    for (double p : psi_values)
      for (double g : gamma_values) out.push_back({c, p, g});
  return out;
}

hybrid::HybridConfig apply_point(const hybrid::HybridConfig& base, const GridPoint& point) {
  hybrid::HybridConfig cfg = base;
  cfg.psi = point.psi;
  cfg.var_svr.C = point.C;
  cfg.var_svr.kernel.gamma = point.gamma;
  cfg.mean_svr.C = point.C;
  cfg.mean_svr.kernel.gamma = point.gamma;
  return cfg;
}

PointResult evaluate_point(const ReturnSeries& series, const hybrid::HybridConfig& base, const GridPoint& point,
                           const TuningOptions& options) {
  PointResult res;
  res.point = point;
  const hybrid::HybridConfig cfg = apply_point(base, point);
  std::vector<Window> windows;
  for (const auto& w : rolling_windows(series, options.plan))
    if (w.target >= options.target_begin && w.target < options.target_end) windows.push_back(w);
  if (windows.empty()) throw Error(ErrorCode::SeriesTooShort, "no rolling window targets the tuning period");

  std::vector<double> var(windows.size(), 0.0), realized(windows.size(), 0.0);
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t first_failure = windows.size();
  parallel_for(windows.size(), options.threads, [&](std::size_t i) {
    if (failed.load()) return;
    const Window& w = windows[i];
    try {
      const auto model = hybrid::fit(series.span().subspan(w.train_begin, w.train_end - w.train_begin), cfg);
      var[i] = hybrid::forecast(model, options.alpha, options.plan.horizon).var_value;
      realized[i] = series[w.target];
    } catch (const std::exception& e) {
      std::lock_guard lock(error_mutex);
      failed.store(true);
      if (i < first_failure) {
        first_failure = i;
        res.error = "window targeting " + format_date(series.dates()[w.target]) + ": " + e.what();
      }
    }
  });
  if (failed.load()) {
    res.failed = true;
    return res;
  }
  const auto report = backtest::coverage_report(backtest::violations(realized, var, options.alpha));
  res.forecasts = windows.size();
  res.violation_rate = report.violation_rate;
  res.p_uc = report.p_uc;
  res.p_ind = report.p_ind;
  res.p_cc = report.p_cc;
  return res;
}

std::vector<PointResult> rank(std::vector<PointResult> results) {
  std::stable_sort(results.begin(), results.end(), [](const PointResult& a, const PointResult& b) {
    if (a.p_cc != b.p_cc) return a.p_cc > b.p_cc;
    if (a.point.C != b.point.C) return a.point.C < b.point.C;
    if (a.point.gamma != b.point.gamma) return a.point.gamma < b.point.gamma;
    return a.point.psi > b.point.psi;
  });
  return results;
}

TuningResult grid_search(const ReturnSeries& series, const Grid& grid, const hybrid::HybridConfig& base,
                         const TuningOptions& options) {
  grid.validate();
  std::vector<PointResult> ok;
  TuningResult out;
  for (const GridPoint& p : grid.points()) {
    std::optional<PointResult> known;
    if (options.lookup) known = options.lookup(p);
    PointResult r = known ? *known : evaluate_point(series, base, p, options);
    if (!known && options.on_point) options.on_point(r);
    if (r.failed) {
      log(LogLevel::Info, "grid point C=" + std::to_string(p.C) + " psi=" + std::to_string(p.psi) +
                              " gamma=" + std::to_string(p.gamma) + " failed: " + r.error);
      out.failed.push_back(std::move(r));
    } else {
      ok.push_back(std::move(r));
    }
  }
  if (ok.empty()) throw Error(ErrorCode::AllPointsFailed, "every grid point failed to fit");
  out.ranked = rank(std::move(ok));
  return out;
}

}  // namespace varkde::tuning

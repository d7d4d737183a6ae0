#include "varkde/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "varkde/error.hpp"
#include "varkde/log.hpp"
#include "varkde/parallel.hpp"
#include "varkde/special.hpp"

namespace varkde::backtest {

namespace {

// x ln y with the 0 ln 0 = 0 convention
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

double bernoulli_loglik(double zeros, double ones, double p) { return xlogy(zeros, 1.0 - p) + xlogy(ones, p); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
}

struct Transitions {
  double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
};

Transitions transitions(const ViolationSeries& v) {
  Transitions c;
  for (std::size_t t = 1; t < v.flags.size(); ++t) {
    const int a = v.flags[t - 1], b = v.flags[t];
    if (a == 0) (b == 0 ? c.n00 : c.n01) += 1.0;
    else (b == 0 ? c.n10 : c.n11) += 1.0;
  }
  return c;
}

}  // namespace

std::size_t ViolationSeries::count() const noexcept {
  std::size_t x = 0;
  for (int f : flags) x += f != 0;
  return x;
}

ViolationSeries violations(std::span<const double> returns, std::span<const double> var, double alpha) {
  check_alpha(alpha);
  if (returns.size() != var.size())
    throw Error(ErrorCode::LengthMismatch, "returns and VaR forecasts differ in length");
  ViolationSeries v;
  v.alpha = alpha;
  v.flags.resize(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) v.flags[t] = returns[t] < -var[t] ? 1 : 0;
  return v;
}

LrResult lr_uc(const ViolationSeries& v) {
  check_alpha(v.alpha);
  if (v.n() == 0) throw Error(ErrorCode::EmptyInput, "coverage test needs at least one observation");
  const double n = static_cast<double>(v.n());
  const double x = static_cast<double>(v.count());
  const double pi = x / n;
  const double stat = std::max(0.0, -2.0 * (bernoulli_loglik(n - x, x, v.alpha) - bernoulli_loglik(n - x, x, pi)));
  return {stat, special::chi2_sf(stat, 1.0)};
}

LrResult lr_ind(const ViolationSeries& v) {
  if (v.n() < 2) throw Error(ErrorCode::EmptyInput, "independence test needs at least two observations");
  const Transitions c = transitions(v);
  const double pi01 = c.n00 + c.n01 > 0 ? c.n01 / (c.n00 + c.n01) : 0.0;
  const double pi11 = c.n10 + c.n11 > 0 ? c.n11 / (c.n10 + c.n11) : 0.0;
  const double pi = (c.n01 + c.n11) / static_cast<double>(v.n() - 1);
  const double restricted = bernoulli_loglik(c.n00 + c.n10, c.n01 + c.n11, pi);
  const double unrestricted = bernoulli_loglik(c.n00, c.n01, pi01) + bernoulli_loglik(c.n10, c.n11, pi11);
  const double stat = std::max(0.0, -2.0 * (restricted - unrestricted));
  return {stat, special::chi2_sf(stat, 1.0)};
}

LrResult lr_cc(const ViolationSeries& v) {
  const double stat = lr_uc(v).stat + lr_ind(v).stat;
  return {stat, special::chi2_sf(stat, 2.0)};
}

TestReport coverage_report(const ViolationSeries& v) {
  TestReport r;
  r.n = v.n();
  r.violations = v.count();
  r.violation_rate = r.n ? static_cast<double>(r.violations) / static_cast<double>(r.n) : 0.0;
  if (r.n == 0) return r;
  const auto uc = lr_uc(v);
  r.lr_uc = uc.stat;
  r.p_uc = uc.p;
  if (r.n >= 2) {
    const auto ind = lr_ind(v);
    r.lr_ind = ind.stat;
    r.p_ind = ind.p;
    r.lr_cc = r.lr_uc + r.lr_ind;
    r.p_cc = special::chi2_sf(r.lr_cc, 2.0);
    const Transitions c = transitions(v);
    r.pi01 = c.n00 + c.n01 > 0 ? c.n01 / (c.n00 + c.n01) : 0.0;
    r.pi11 = c.n10 + c.n11 > 0 ? c.n11 / (c.n10 + c.n11) : 0.0;
  } else {
    r.lr_cc = r.lr_uc;
    r.p_cc = special::chi2_sf(r.lr_cc, 2.0);
  }
  return r;
}

std::vector<double> lopez_loss(std::span<const double> returns, std::span<const double> var) {
  if (returns.size() != var.size())
    throw Error(ErrorCode::LengthMismatch, "returns and VaR forecasts differ in length");
  std::vector<double> out(returns.size(), 0.0);
  for (std::size_t t = 0; t < returns.size(); ++t) {
    if (returns[t] < -var[t]) {
      const double excess = returns[t] + var[t];
      out[t] = 1.0 + excess * excess;
    }
  }
  return out;
}

std::size_t ModelTrack::failures() const {
  return static_cast<std::size_t>(std::count(ok.begin(), ok.end(), false));
}

BacktestResult run_backtest(const ReturnSeries& series,
                            const std::vector<std::shared_ptr<const models::ForecastModel>>& roster,
                            const BacktestOptions& options) {
  if (roster.empty()) throw Error(ErrorCode::Config, "model roster is empty");
  if (options.alphas.empty()) throw Error(ErrorCode::Config, "no VaR levels given");
  for (double a : options.alphas) check_alpha(a);

  BacktestResult res;
  res.alphas = options.alphas;
  res.horizon = options.plan.horizon;
  for (const auto& w : rolling_windows(series, options.plan))
    if (w.target >= options.target_begin && w.target < options.target_end) res.windows.push_back(w);
  if (res.windows.empty()) throw Error(ErrorCode::SeriesTooShort, "no rolling window targets the requested period");
  for (const auto& w : res.windows) {
    res.target_dates.push_back(series.dates()[w.target]);
    res.target_returns.push_back(series[w.target]);
  }

  const std::size_t nw = res.windows.size(), nm = roster.size(), na = options.alphas.size();
  res.models.resize(nm);
  for (std::size_t m = 0; m < nm; ++m) {
    auto& track = res.models[m];
    track.name = roster[m]->name();
    track.ok.assign(nw, false);
    track.errors.assign(nw, {});
    track.var.assign(na, std::vector<double>(nw, 0.0));
  }

  parallel_for(nw * nm, options.threads, [&](std::size_t task) {
    const std::size_t w = task / nm, m = task % nm;
    const Window& win = res.windows[w];
    auto& track = res.models[m];
    try {
      const auto train = series.span().subspan(win.train_begin, win.train_end - win.train_begin);
      const auto vars = roster[m]->forecast(train, options.alphas, options.plan.horizon);
      if (vars.size() != na) throw Error(ErrorCode::DimensionMismatch, "model returned the wrong number of forecasts");
      for (std::size_t a = 0; a < na; ++a) {
        if (std::isnan(vars[a])) throw Error(ErrorCode::NonFinite, "model returned a NaN forecast");
        track.var[a][w] = vars[a];
      }
      track.ok[w] = true;
    } catch (const std::exception& e) {
      track.errors[w] = e.what();
    }
  });

  for (std::size_t w = 0; w < nw; ++w)
    for (const auto& track : res.models)
      if (!track.ok[w])
        log(LogLevel::Warning, track.name + ": window targeting " + format_date(res.target_dates[w]) +
                                   " skipped: " + track.errors[w]);

  std::vector<std::size_t> common;
  for (std::size_t w = 0; w < nw; ++w) {
    bool all = true;
    for (const auto& track : res.models) all = all && track.ok[w];
    if (all) common.push_back(w);
  }

  res.reports.assign(na, {});
  for (std::size_t a = 0; a < na; ++a) {
    const double alpha = options.alphas[a];
    std::vector<std::vector<double>> common_losses(nm);
    for (std::size_t m = 0; m < nm; ++m) {
      const auto& track = res.models[m];
      std::vector<double> r, v;
      for (std::size_t w = 0; w < nw; ++w)
        if (track.ok[w]) {
          r.push_back(res.target_returns[w]);
          v.push_back(track.var[a][w]);
        }
      ModelAlphaReport rep;
      rep.model = track.name;
      rep.alpha = alpha;
      rep.forecasts = r.size();
      if (!r.empty()) {
        rep.coverage = coverage_report(violations(r, v, alpha));
        const auto loss = lopez_loss(r, v);
        for (double l : loss) rep.mean_loss += l;
        rep.mean_loss /= static_cast<double>(loss.size());
      }
      std::vector<double> cr, cv;
      for (std::size_t w : common) {
        cr.push_back(res.target_returns[w]);
        cv.push_back(track.var[a][w]);
      }
      common_losses[m] = lopez_loss(cr, cv);
      res.reports[a].push_back(std::move(rep));
    }
    if (nm >= 2 && common.size() >= 50) {
      for (std::size_t m = 0; m < nm; ++m)
        res.reports[a][m].spa_p = spa::spa_test(common_losses, m, options.spa).p_value;
    }
  }
  return res;
}

}  // namespace varkde::backtest

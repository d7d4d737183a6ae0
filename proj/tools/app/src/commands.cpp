#include "varkde_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "varkde/backtest.hpp"
#include "varkde/error.hpp"
#include "varkde/log.hpp"
#include "varkde/parallel.hpp"
#include "varkde_app/output.hpp"

namespace varkde::app {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

ReturnSeries load_returns(const RunConfig& cfg) {
  const auto loaded = load_prices(cfg.data_path, cfg.columns);
  if (loaded.dropped_rows)
    log(LogLevel::Info, cfg.data_path.string() + ": dropped " + std::to_string(loaded.dropped_rows) +
                            " rows without a price");
  if (loaded.series.size() < 2)
    throw Error(ErrorCode::SeriesTooShort, cfg.data_path.string() + ": need at least two prices for a return");
  return log_returns(loaded.series);
}

tuning::GridPoint base_point(const hybrid::HybridConfig& h) { return {h.var_svr.C, h.psi, h.var_svr.kernel.gamma}; }

// The hybrid with possibly different tuned settings per VaR level; levels that
// share settings share one fit.
class TunedHybrid final : public models::ForecastModel {
 public:
  explicit TunedHybrid(const RunConfig& cfg) : base_(cfg.hybrid), tuned_(cfg.tuned) {}
  std::string name() const override { return "SVR-GARCH-KDE"; }

  std::vector<double> forecast(std::span<const double> train, std::span<const double> alphas,
                               std::size_t horizon) const override {
    std::vector<double> out(alphas.size());
    std::vector<std::pair<tuning::GridPoint, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const auto it = tuned_.find(alphas[i]);
      const tuning::GridPoint p = it == tuned_.end() ? base_point(base_) : it->second;
      auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& e) { return e.first == p; });
      if (g == groups.end()) {
        groups.push_back({p, {}});
        g = groups.end() - 1;
      }
      g->second.push_back(i);
    }
    for (const auto& [point, idx] : groups) {
      const auto model = hybrid::fit(train, tuning::apply_point(base_, point));
      std::vector<double> a;
      for (std::size_t i : idx) a.push_back(alphas[i]);
      const auto fc = hybrid::forecast(model, a, horizon);
      for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = fc[k].var_value;
    }
    return out;
  }

 private:
  hybrid::HybridConfig base_;
  std::map<double, tuning::GridPoint> tuned_;
};

std::vector<std::shared_ptr<const models::ForecastModel>> build_roster(const RunConfig& cfg) {
  std::vector<std::shared_ptr<const models::ForecastModel>> roster;
  for (const auto& entry : cfg.roster) {
    if (entry == "SVR-GARCH-KDE") roster.push_back(std::make_shared<TunedHybrid>(cfg));
    else roster.push_back(models::make_model(entry, cfg.hybrid));
  }
  return roster;
}

// ---- stats

struct StatsRow {
  std::string label;
  std::size_t n = 0;
  double v[8] = {};  // min q1 mean median q3 max sd (x100), then unused
  double skew = NAN, kurt = NAN;
};

StatsRow stats_row(const std::string& label, std::span<const double> r) {
  StatsRow row;
  row.label = label;
  row.n = r.size();
  if (r.empty()) return row;
  if (r.size() >= 4) {
    const auto s = descriptive_stats(r);
    const double vals[] = {s.min, s.q1, s.mean, s.median, s.q3, s.max, std::sqrt(s.variance)};
    for (int i = 0; i < 7; ++i) row.v[i] = 100.0 * vals[i];
    row.skew = s.skewness;
    row.kurt = s.kurtosis;
  } else {
    const double vals[] = {empirical_quantile(r, 0.0), empirical_quantile(r, 0.25), mean(r),
                           empirical_quantile(r, 0.5), empirical_quantile(r, 0.75), empirical_quantile(r, 1.0),
                           r.size() > 1 ? sample_std(r) : NAN};
    for (int i = 0; i < 7; ++i) row.v[i] = 100.0 * vals[i];
  }
  return row;
}

std::string cell(double v, int prec = 4) {
  if (std::isnan(v)) return "NA";
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

std::string csv_num(double v) { return std::isnan(v) ? "NA" : num(v); }

// ---- reports

struct ReportRow {
  std::string model;
  std::size_t forecasts = 0, failures = 0, violations = 0;
  backtest::TestReport cov;
  std::optional<double> spa_p;
  double mean_loss = 0.0;
};

json row_json(const ReportRow& r) {
  return {{"model", r.model},
          {"forecasts", r.forecasts},
          {"failed_windows", r.failures},
          {"violations", r.cov.violations},
          {"violation_rate", r.cov.violation_rate},
          {"lr_uc", r.cov.lr_uc},
          {"p_uc", r.cov.p_uc},
          {"lr_ind", r.cov.lr_ind},
          {"p_ind", r.cov.p_ind},
          {"lr_cc", r.cov.lr_cc},
          {"p_cc", r.cov.p_cc},
          {"pi01", r.cov.pi01},
          {"pi11", r.cov.pi11},
          {"spa_p", r.spa_p ? json(*r.spa_p) : json(nullptr)},
          {"mean_lopez_loss", r.mean_loss}};
}

ReportRow row_from(const json& j) {
  ReportRow r;
  r.model = j.at("model").get<std::string>();
  r.forecasts = j.at("forecasts").get<std::size_t>();
  r.failures = j.at("failed_windows").get<std::size_t>();
  r.cov.violations = j.at("violations").get<std::size_t>();
  r.cov.violation_rate = j.at("violation_rate").get<double>();
  r.cov.p_uc = j.at("p_uc").get<double>();
  r.cov.p_ind = j.at("p_ind").get<double>();
  r.cov.p_cc = j.at("p_cc").get<double>();
  if (!j.at("spa_p").is_null()) r.spa_p = j.at("spa_p").get<double>();
  r.mean_loss = j.at("mean_lopez_loss").get<double>();
  return r;
}

void sort_rows(std::vector<ReportRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.cov.p_cc > b.cov.p_cc; });
}

std::string report_csv(const RunConfig& cfg, std::size_t h, double alpha, const std::vector<ReportRow>& rows) {
  std::ostringstream s;
  s << stamp(cfg) << "# horizon=" << h << " alpha=" << alpha_tag(alpha) << " values x100\n"
    << "Model,Forecasts,Violations,SPA,UC,ID,CC\n";
  for (const auto& r : rows)
    s << csv_quote(r.model) << ',' << r.forecasts << ',' << num(100.0 * r.cov.violation_rate) << ','
      << (r.spa_p ? num(100.0 * *r.spa_p) : std::string()) << ',' << num(100.0 * r.cov.p_uc) << ','
      << num(100.0 * r.cov.p_ind) << ',' << num(100.0 * r.cov.p_cc) << '\n';
  return s.str();
}

void print_table(std::ostream& out, std::size_t h, double alpha, const std::vector<ReportRow>& rows, bool markdown) {
  const char* sep = markdown ? " | " : "  ";
  out << (markdown ? "### " : "") << "horizon " << h << ", alpha " << alpha_tag(alpha) << " (values x100)\n";
  if (markdown) out << "\n| Model | Forecasts | Violations | SPA | UC | ID | CC |\n|---|---|---|---|---|---|---|\n";
  else
    out << std::left << std::setw(16) << "Model" << std::right << std::setw(10) << "Forecasts" << std::setw(12)
        << "Violations" << std::setw(9) << "SPA" << std::setw(9) << "UC" << std::setw(9) << "ID" << std::setw(9)
        << "CC" << '\n';
  for (const auto& r : rows) {
    const std::string spa = r.spa_p ? cell(100.0 * *r.spa_p, 2) : "-";
    if (markdown) {
      out << "| " << r.model << sep << r.forecasts << sep << cell(100.0 * r.cov.violation_rate, 2) << sep << spa
          << sep << cell(100.0 * r.cov.p_uc, 2) << sep << cell(100.0 * r.cov.p_ind, 2) << sep
          << cell(100.0 * r.cov.p_cc, 2) << " |\n";
    } else {
      out << std::left << std::setw(16) << r.model << std::right << std::setw(10) << r.forecasts << std::setw(12)
          << cell(100.0 * r.cov.violation_rate, 2) << std::setw(9) << spa << std::setw(9)
          << cell(100.0 * r.cov.p_uc, 2) << std::setw(9) << cell(100.0 * r.cov.p_ind, 2) << std::setw(9)
          << cell(100.0 * r.cov.p_cc, 2) << '\n';
    }
  }
  out << '\n';
}

// ---- tuning journal

std::string point_key(double alpha, const tuning::GridPoint& p) {
  return num(alpha) + "|" + num(p.C) + "|" + num(p.psi) + "|" + num(p.gamma);
}

json point_json(const std::string& hash, double alpha, const tuning::PointResult& r) {
  return {{"hash", hash},
          {"alpha", alpha},
          {"C", r.point.C},
          {"psi", r.point.psi},
          {"gamma", r.point.gamma},
          {"failed", r.failed},
          {"error", r.error},
          {"forecasts", r.forecasts},
          {"violation_rate", r.violation_rate},
          {"p_uc", r.p_uc},
          {"p_ind", r.p_ind},
          {"p_cc", r.p_cc}};
}

std::map<std::string, tuning::PointResult> read_journal(const fs::path& path, const std::string& hash) {
  std::map<std::string, tuning::PointResult> done;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.at("hash").get<std::string>() != hash) continue;
      tuning::PointResult r;
      r.point = {j.at("C").get<double>(), j.at("psi").get<double>(), j.at("gamma").get<double>()};
      r.failed = j.at("failed").get<bool>();
      r.error = j.at("error").get<std::string>();
      r.forecasts = j.at("forecasts").get<std::size_t>();
      r.violation_rate = j.at("violation_rate").get<double>();
      r.p_uc = j.at("p_uc").get<double>();
      r.p_ind = j.at("p_ind").get<double>();
      r.p_cc = j.at("p_cc").get<double>();
      done[point_key(j.at("alpha").get<double>(), r.point)] = r;
    } catch (const json::exception&) {
      // a torn final line from an interrupted run
      log(LogLevel::Warning, path.string() + ": ignoring unreadable journal line");
    }
  }
  return done;
}

}  // namespace

void cmd_stats(const RunConfig& cfg, std::ostream& out) {
  const auto r = load_returns(cfg);
  std::vector<StatsRow> rows{stats_row(cfg.data_path.stem().string(), r.span())};
  auto add_period = [&](const char* label, const Period& p) {
    if (!p.begin && !p.end) return;
    const auto [b, e] = p.indices(r.dates());
    rows.push_back(stats_row(label, r.span().subspan(b, e - b)));
  };
  add_period("tuning", cfg.tuning);
  add_period("forecast", cfg.forecast);

  static const char* names[] = {"Min", "Q1", "Mean", "Median", "Q3", "Max", "SD"};
  out << "Descriptive statistics of log-returns (x100; skewness and excess kurtosis unscaled)\n";
  out << std::left << std::setw(12) << "Series" << std::right << std::setw(7) << "N";
  for (const char* n : names) out << std::setw(10) << n;
  out << std::setw(10) << "Skew" << std::setw(10) << "Kurt" << '\n';
  std::ostringstream csv;
  csv << stamp(cfg) << "Series,N,Min,Q1,Mean,Median,Q3,Max,SD,Skewness,Kurtosis\n";
  for (const auto& row : rows) {
    out << std::left << std::setw(12) << row.label << std::right << std::setw(7) << row.n;
    csv << csv_quote(row.label) << ',' << row.n;
    for (int i = 0; i < 7; ++i) {
      out << std::setw(10) << cell(row.v[i]);
      csv << ',' << csv_num(row.v[i]);
    }
    out << std::setw(10) << cell(row.skew) << std::setw(10) << cell(row.kurt) << '\n';
    csv << ',' << csv_num(row.skew) << ',' << csv_num(row.kurt) << '\n';
  }
  write_file(cfg.out / "stats.csv", csv.str());
}

void cmd_tune(RunConfig cfg, std::ostream& out) {
  cfg.tuned.clear();
  cfg.chosen_file.reset();
  const auto series = load_returns(cfg);
  const auto [tb, te] = cfg.tuning.indices(series.dates());
  const std::string hash = config_hash(cfg);
  const fs::path journal_path = cfg.out / "tune_journal.jsonl";
  auto done = read_journal(journal_path, hash);
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  std::ofstream journal(journal_path, std::ios::app);
  if (!journal) throw Error(ErrorCode::UnreadableFile, "cannot append to " + journal_path.string());

  json chosen = json::array();
  for (double alpha : cfg.alphas) {
    tuning::TuningOptions opt;
    opt.plan = cfg.plan;
    opt.plan.horizon = 1;
    opt.alpha = alpha;
    opt.target_begin = tb;
    opt.target_end = te;
    opt.threads = cfg.threads;
    std::size_t reused = 0;
    opt.lookup = [&](const tuning::GridPoint& p) -> std::optional<tuning::PointResult> {
      const auto it = done.find(point_key(alpha, p));
      if (it == done.end()) return std::nullopt;
      ++reused;
      return it->second;
    };
    opt.on_point = [&](const tuning::PointResult& r) {
      journal << point_json(hash, alpha, r).dump() << '\n';
      journal.flush();
    };
    hybrid::HybridConfig base = cfg.hybrid;
    base.alpha = alpha;
    const auto res = tuning::grid_search(series, cfg.grid, base, opt);
    if (reused) log(LogLevel::Info, "alpha " + alpha_tag(alpha) + ": " + std::to_string(reused) +
                                        " grid points taken from the journal");

    std::ostringstream csv;
    csv << stamp(cfg) << "# alpha=" << alpha_tag(alpha) << " values x100\n"
        << "C,psi,gamma,Forecasts,Violations,UC,ID,CC\n";
    for (const auto& r : res.ranked)
      csv << num(r.point.C) << ',' << num(r.point.psi) << ',' << num(r.point.gamma) << ',' << r.forecasts << ','
          << num(100.0 * r.violation_rate) << ',' << num(100.0 * r.p_uc) << ',' << num(100.0 * r.p_ind) << ','
          << num(100.0 * r.p_cc) << '\n';
    write_file(cfg.out / ("tuning_a" + alpha_tag(alpha) + ".csv"), csv.str());
    if (!res.failed.empty()) {
      std::ostringstream f;
      f << stamp(cfg) << "C,psi,gamma,Error\n";
      for (const auto& r : res.failed)
        f << num(r.point.C) << ',' << num(r.point.psi) << ',' << num(r.point.gamma) << ',' << csv_quote(r.error)
          << '\n';
      write_file(cfg.out / ("tuning_failed_a" + alpha_tag(alpha) + ".csv"), f.str());
    }
    const auto& c = res.chosen();
    chosen.push_back({{"alpha", alpha},
                      {"C", c.point.C},
                      {"psi", c.point.psi},
                      {"gamma", c.point.gamma},
                      {"p_cc", c.p_cc},
                      {"violation_rate", c.violation_rate}});
    out << "alpha " << alpha_tag(alpha) << ": C=" << num(c.point.C) << " psi=" << num(c.point.psi)
        << " gamma=" << num(c.point.gamma) << " violations=" << cell(100.0 * c.violation_rate, 2)
        << "% CC p=" << cell(100.0 * c.p_cc, 2) << "% (" << res.ranked.size() << " ranked, " << res.failed.size()
        << " failed)\n";
  }
  const json doc = {{"config_hash", hash}, {"seed", cfg.seed}, {"chosen", chosen}};
  write_file(cfg.out / "chosen.json", doc.dump(2) + "\n");
}

void cmd_backtest(RunConfig cfg, std::ostream& out) {
  const fs::path implicit = cfg.out / "chosen.json";
  if (!cfg.chosen_file && fs::exists(implicit)) {
    load_chosen(cfg, implicit);
    log(LogLevel::Info, "using tuned hybrid settings from " + implicit.string());
  }
  const auto series = load_returns(cfg);
  const auto [fb, fe] = cfg.forecast.indices(series.dates());
  const auto roster = build_roster(cfg);

  json runs = json::array();
  for (std::size_t h : cfg.horizons) {
    backtest::BacktestOptions opt;
    opt.plan = cfg.plan;
    opt.plan.horizon = h;
    opt.alphas = cfg.alphas;
    opt.target_begin = fb;
    opt.target_end = fe;
    opt.threads = cfg.threads;
    opt.spa = cfg.spa;
    opt.spa.seed = derive_seed(cfg.seed, h);
    const auto res = backtest::run_backtest(series, roster, opt);
    for (const auto& track : res.models)
      if (track.failures() == track.ok.size())
        throw Error(ErrorCode::DegenerateModel, track.name + " produced no forecasts at horizon " +
                                                    std::to_string(h) + "; first error: " + track.errors.front());

    for (std::size_t a = 0; a < res.alphas.size(); ++a) {
      const double alpha = res.alphas[a];
      std::vector<ReportRow> rows;
      for (std::size_t m = 0; m < res.models.size(); ++m) {
        const auto& rep = res.reports[a][m];
        rows.push_back({rep.model, rep.forecasts, res.models[m].failures(), rep.coverage.violations, rep.coverage,
                        rep.spa_p, rep.mean_loss});
      }
      sort_rows(rows);
      const std::string tag = "_h" + std::to_string(h) + "_a" + alpha_tag(alpha);
      write_file(cfg.out / ("report" + tag + ".csv"), report_csv(cfg, h, alpha, rows));

      std::ostringstream fc;
      fc << stamp(cfg) << kForecastHeader << '\n';
      for (const auto& track : res.models)
        for (std::size_t w = 0; w < res.windows.size(); ++w) {
          if (!track.ok[w]) continue;
          const double r = res.target_returns[w], v = track.var[a][w];
          fc << format_date(res.target_dates[w]) << ',' << num(r) << ',' << csv_quote(track.name) << ',' << num(v)
             << ',' << (r < -v ? 1 : 0) << '\n';
        }
      write_file(cfg.out / ("forecasts" + tag + ".csv"), fc.str());

      json jrows = json::array();
      for (const auto& r : rows) jrows.push_back(row_json(r));
      runs.push_back({{"horizon", h},
                      {"alpha", alpha},
                      {"windows", res.windows.size()},
                      {"first_target", format_date(res.target_dates.front())},
                      {"last_target", format_date(res.target_dates.back())},
                      {"spa_seed", opt.spa.seed},
                      {"rows", jrows}});
      print_table(out, h, alpha, rows, false);
    }
  }
  const json doc = {{"config_hash", config_hash(cfg)},
                    {"seed", cfg.seed},
                    {"spa", {{"n_boot", cfg.spa.n_boot}, {"block_q", cfg.spa.block_q}}},
                    {"config", cfg.canonical()},
                    {"runs", runs}};
  write_file(cfg.out / "report.json", doc.dump(1) + "\n");
}

void cmd_spa(const RunConfig& cfg, const std::vector<fs::path>& files, std::ostream& out) {
  if (files.empty()) throw Error(ErrorCode::InvalidArgument, "no forecast files to test");
  for (const auto& file : files) {
    const auto rows = parse_forecasts(read_file(file), file.string());
    std::vector<std::string> names;
    std::map<std::string, std::map<std::string, std::pair<double, double>>> by_model;
    for (const auto& r : rows) {
      if (!by_model.count(r.model)) names.push_back(r.model);
      by_model[r.model][r.date] = {r.ret, r.var};
    }
    if (names.size() < 2) throw Error(ErrorCode::InvalidArgument, file.string() + ": SPA needs at least two models");
    std::vector<std::string> common;
    for (const auto& [date, _] : by_model[names[0]]) {
      bool all = true;
      for (const auto& n : names) all = all && by_model[n].count(date);
      if (all) common.push_back(date);
    }
    std::vector<std::vector<double>> losses;
    for (const auto& n : names) {
      std::vector<double> r, v;
      for (const auto& d : common) {
        r.push_back(by_model[n][d].first);
        v.push_back(by_model[n][d].second);
      }
      losses.push_back(backtest::lopez_loss(r, v));
    }
    spa::SpaOptions opt = cfg.spa;
    opt.seed = cfg.seed;
    std::ostringstream csv;
    csv << stamp(cfg) << "# source=" << file.filename().string() << " days=" << common.size()
        << " n_boot=" << opt.n_boot << " block_q=" << num(opt.block_q) << "\nBenchmark,T,SPA\n";
    out << file.filename().string() << ": " << common.size() << " common days\n";
    for (std::size_t b = 0; b < names.size(); ++b) {
      const auto res = spa::spa_test(losses, b, opt);
      csv << csv_quote(names[b]) << ',' << num(res.t_stat) << ',' << num(100.0 * res.p_value) << '\n';
      out << "  " << std::left << std::setw(16) << names[b] << std::right << " T=" << std::setw(9)
          << cell(res.t_stat, 3) << "  SPA p=" << cell(100.0 * res.p_value, 2) << "%\n";
    }
    write_file(cfg.out / ("spa_" + file.stem().string() + ".csv"), csv.str());
  }
}

void cmd_plot(const fs::path& forecast_csv, const fs::path& svg_out, const std::string& title) {
  const auto rows = parse_forecasts(read_file(forecast_csv), forecast_csv.string());
  write_file(svg_out, render_svg(rows, title.empty() ? forecast_csv.stem().string() : title));
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const fs::path path = cfg.out / "report.json";
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": " + e.what());
  }
  std::ostringstream md;
  try {
    md << "# VaR backtest report\n\nconfig hash `" << doc.at("config_hash").get<std::string>() << "`, seed "
       << doc.at("seed").get<std::uint64_t>() << ", SPA with " << doc.at("spa").at("n_boot").get<std::size_t>()
       << " stationary-bootstrap resamples (q = " << num(doc.at("spa").at("block_q").get<double>()) << ")\n\n";
    for (const auto& run : doc.at("runs")) {
      std::vector<ReportRow> rows;
      for (const auto& r : run.at("rows")) rows.push_back(row_from(r));
      const auto h = run.at("horizon").get<std::size_t>();
      const double alpha = run.at("alpha").get<double>();
      print_table(out, h, alpha, rows, false);
      print_table(md, h, alpha, rows, true);
      md << "Targets " << run.at("first_target").get<std::string>() << " to "
         << run.at("last_target").get<std::string>() << ", " << run.at("windows").get<std::size_t>()
         << " windows.\n\n";
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": " + e.what());
  }
  write_file(cfg.out / "report.md", md.str());
}

}  // namespace varkde::app

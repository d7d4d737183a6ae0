#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "varkde/error.hpp"
#include "varkde/log.hpp"
#include "varkde_app/commands.hpp"

namespace varkde::app {

namespace {

namespace fs = std::filesystem;

int exit_status(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 1;
    case ErrorCategory::Data: return 2;
    case ErrorCategory::Numerical: return 3;
  }
  return 3;
}

// Routes library messages to `err` for the duration of one command.
struct SinkGuard {
  explicit SinkGuard(std::ostream& err) {
    set_log_sink([&err](LogLevel level, std::string_view msg) {
      if (level == LogLevel::Debug) return;
      static constexpr const char* names[] = {"debug", "info", "warning", "error"};
      err << "[varkde " << names[static_cast<int>(level)] << "] " << msg << '\n';
    });
  }
  ~SinkGuard() {
    set_log_sink([](LogLevel level, std::string_view msg) {
      if (level == LogLevel::Debug) return;
      static constexpr const char* names[] = {"debug", "info", "warning", "error"};
      std::clog << "[varkde " << names[static_cast<int>(level)] << "] " << msg << '\n';
    });
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Value-at-Risk forecasting with SVR-GARCH-KDE and parametric GARCH benchmarks", "varkde"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  auto* config_opt = app.add_option("--config", config_path, "Run configuration (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the configured seed");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0: all cores)");

  auto* stats = app.add_subcommand("stats", "Descriptive statistics of the log-returns");
  auto* tune = app.add_subcommand("tune", "Grid search of the hybrid settings per VaR level");
  auto* bt = app.add_subcommand("backtest", "Rolling-window backtest of the model roster");
  auto* spa = app.add_subcommand("spa", "SPA test over forecast files");
  std::vector<std::string> spa_files;
  spa->add_option("forecasts", spa_files, "Forecast CSV files (default: all in the output directory)");
  auto* plot = app.add_subcommand("plot", "SVG chart of a forecast file");
  std::string plot_in, plot_out, plot_title;
  plot->add_option("forecasts", plot_in, "Forecast CSV")->required();
  plot->add_option("-o,--output", plot_out, "SVG file (default: next to the output directory)");
  plot->add_option("--title", plot_title, "Chart title");
  auto* report = app.add_subcommand("report", "Summarise the last backtest report");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  SinkGuard guard(err);
  try {
    const bool needs_config = stats->parsed() || tune->parsed() || bt->parsed();
    if (needs_config && !*config_opt) throw Error(ErrorCode::Config, "--config is required for this command");
    RunConfig cfg;
    if (*config_opt) cfg = load_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    if (*out_opt) cfg.out = out_dir;
    if (*threads_opt) cfg.threads = threads;

    if (stats->parsed()) cmd_stats(cfg, out);
    else if (tune->parsed()) cmd_tune(cfg, out);
    else if (bt->parsed()) cmd_backtest(cfg, out);
    else if (report->parsed()) cmd_report(cfg, out);
    else if (spa->parsed()) {
      std::vector<fs::path> files(spa_files.begin(), spa_files.end());
      if (files.empty() && fs::is_directory(cfg.out)) {
        for (const auto& e : fs::directory_iterator(cfg.out)) {
          const auto name = e.path().filename().string();
          if (name.rfind("forecasts_", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
      }
      cmd_spa(cfg, files, out);
    } else if (plot->parsed()) {
      fs::path target = plot_out.empty() ? cfg.out / (fs::path(plot_in).stem().string() + ".svg") : fs::path(plot_out);
      cmd_plot(plot_in, target, plot_title);
      out << "wrote " << target.string() << '\n';
    }
    return 0;
  } catch (const Error& e) {
    err << "varkde: " << e.what() << '\n';
    return exit_status(category(e.code()));
  } catch (const fs::filesystem_error& e) {
    err << "varkde: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "varkde: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace varkde::app

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varkde_app/config.hpp"

namespace varkde::app {

void cmd_stats(const RunConfig& cfg, std::ostream& out);
void cmd_tune(RunConfig cfg, std::ostream& out);
void cmd_backtest(RunConfig cfg, std::ostream& out);
/// SPA table for each forecast file, one row per model as benchmark. Models are
/// keyed by name, so repeated names in a file count once.
void cmd_spa(const RunConfig& cfg, const std::vector<std::filesystem::path>& forecast_files, std::ostream& out);
void cmd_plot(const std::filesystem::path& forecast_csv, const std::filesystem::path& svg_out, const std::string& title);
/// Text summary of the report written by cmd_backtest in `cfg.out`.
void cmd_report(const RunConfig& cfg, std::ostream& out);

/// Full command-line entry point. Returns the process exit status:
/// 0 success, 1 usage or configuration, 2 data, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace varkde::app

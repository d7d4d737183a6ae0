#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "varkde_app/config.hpp"

namespace varkde::app {

/// Shortest-looking fixed rendering used in every CSV ("%.12g").
std::string num(double v);
/// VaR level as used in file names: 0.01 -> "0.01".
std::string alpha_tag(double alpha);
std::string csv_quote(const std::string& s);
/// First line of every output file.
std::string stamp(const RunConfig& cfg);

/// Creates parent directories and writes the file; throws UnreadableFile on failure.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// One row of a forecast series file.
struct ForecastRow {
  std::string date;
  double ret = 0.0;
  std::string model;
  double var = 0.0;
  int violation = 0;
};

inline constexpr const char* kForecastHeader = "date,return,model,var,violation";

/// Parses a forecast CSV (lines starting with '#' are skipped). Throws MalformedInput.
std::vector<ForecastRow> parse_forecasts(const std::string& text, const std::string& source);

/// Static SVG 1.1 chart: returns, the negated VaR of each model and violation markers.
std::string render_svg(const std::vector<ForecastRow>& rows, const std::string& title);

}  // namespace varkde::app

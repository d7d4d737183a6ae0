#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varkde/hybrid.hpp"
#include "varkde/spa.hpp"
#include "varkde/timeseries.hpp"
#include "varkde/tuning.hpp"

namespace varkde::app {

/// Target dates in [begin, end); either side may be open.
struct Period {
  std::optional<Date> begin;
  std::optional<Date> end;

  /// Index range of `dates` covered by the period.
  std::pair<std::size_t, std::size_t> indices(const std::vector<Date>& dates) const;
};

struct RunConfig {
  std::filesystem::path data_path;
  CsvColumns columns;
  Period tuning;
  Period forecast;
  std::vector<double> alphas{0.01, 0.025, 0.05};
  std::vector<std::size_t> horizons{1, 10};
  WindowPlan plan;
  std::vector<std::string> roster;
  hybrid::HybridConfig hybrid;
  /// Per-level (C, psi, gamma) overriding the hybrid defaults.
  std::map<double, tuning::GridPoint> tuned;
  std::optional<std::filesystem::path> chosen_file;
  tuning::Grid grid = tuning::Grid::default_grid();
  spa::SpaOptions spa;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::filesystem::path out = "out";

  /// Result-affecting settings as a canonical document (no threads, no output path).
  nlohmann::json canonical() const;
};

/// The hybrid followed by the nine parametric benchmarks.
std::vector<std::string> default_roster();

/// Reads a JSON run configuration. Relative paths resolve against `base_dir`.
/// Throws Error(Config) for unknown keys, bad types and out-of-domain values.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical document, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Hybrid settings for one VaR level: the tuned point if any, else the defaults.
hybrid::HybridConfig hybrid_for(const RunConfig& cfg, double alpha);

/// Reads a chosen-parameters file written by the tune command into `cfg.tuned`.
void load_chosen(RunConfig& cfg, const std::filesystem::path& path);

}  // namespace varkde::app

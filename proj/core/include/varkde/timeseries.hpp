#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace varkde {

using Date = std::chrono::sys_days;

/// Parses `text` with a strftime-style `format` ("%Y-%m-%d" by default).
Date parse_date(const std::string& text, const std::string& format = "%Y-%m-%d");
std::string format_date(Date date);

/// Adjusted closing prices on strictly increasing dates; at least two rows, all positive.
class PriceSeries {
 public:
  PriceSeries(std::vector<Date> dates, std::vector<double> prices);

  std::size_t size() const noexcept { return prices_.size(); }
  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::vector<double>& prices() const noexcept { return prices_; }

 private:
  std::vector<Date> dates_;
  std::vector<double> prices_;
};

/// Log returns with the date of the later price of each pair. Values are finite.
class ReturnSeries {
 public:
  ReturnSeries(std::vector<Date> dates, std::vector<double> returns);

  /// Synthetic series dated on consecutive calendar days starting 2000-01-01.
  static ReturnSeries from_values(std::vector<double> returns);

  std::size_t size() const noexcept { return returns_.size(); }
  bool empty() const noexcept { return returns_.empty(); }
  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::vector<double>& values() const noexcept { return returns_; }
  std::span<const double> span() const noexcept { return returns_; }
  double operator[](std::size_t i) const { return returns_[i]; }

 private:
  std::vector<Date> dates_;
  std::vector<double> returns_;
};

struct CsvColumns {
  std::string date_column = "date";
  std::string price_column = "adjclose";
  std::string date_format = "%Y-%m-%d";
  char delimiter = ',';
};

struct LoadedPrices {
  PriceSeries series;
  std::size_t dropped_rows = 0;  // rows whose price field was missing
};

/// Reads a delimiter-separated file with a header row; rows are sorted by date.
/// Missing prices ("", "null", "NA", "NaN", ".") are dropped and counted.
LoadedPrices load_prices(const std::filesystem::path& path, const CsvColumns& columns = {});
LoadedPrices parse_prices(const std::string& text, const CsvColumns& columns = {},
                          const std::string& source_name = "<memory>");

ReturnSeries log_returns(const PriceSeries& prices);

struct ScalingParams {
  double mean = 0.0;
  double std = 1.0;

  double unscale(double scaled) const noexcept { return scaled * std + mean; }
};

/// Scales to sample mean 0 and unbiased sample std 1. Throws ConstantSeries.
std::pair<ReturnSeries, ScalingParams> standardize(const ReturnSeries& returns);
std::pair<std::vector<double>, ScalingParams> standardize(std::span<const double> values);
ReturnSeries unscale(const ReturnSeries& scaled, const ScalingParams& params);

struct WindowPlan {
  std::size_t window_len = 251;
  std::size_t step = 1;
  std::size_t horizon = 1;

  static constexpr std::size_t kMinWindow = 30;
  void validate() const;
};

/// Training slice [train_begin, train_end) and the index forecast from it.
struct Window {
  std::size_t train_begin = 0;
  std::size_t train_end = 0;
  std::size_t target = 0;
};

/// All windows of `plan` over a series of `length` points, chronologically.
/// The target lies `horizon` steps past the last training index.
std::vector<Window> rolling_windows(std::size_t length, const WindowPlan& plan);
std::vector<Window> rolling_windows(const ReturnSeries& returns, const WindowPlan& plan);

struct DescriptiveStats {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double variance = 0.0;  // n - 1 denominator
  double skewness = 0.0;  // m3 / m2^1.5
  double kurtosis = 0.0;  // excess, m4 / m2^2 - 3
};

DescriptiveStats descriptive_stats(std::span<const double> values);
inline DescriptiveStats descriptive_stats(const ReturnSeries& r) { return descriptive_stats(r.span()); }

// Sample helpers shared across the library.

double mean(std::span<const double> values);
/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);
double sample_std(std::span<const double> values);
/// Empirical quantile with linear interpolation between order statistics
/// (position p * (n - 1) in the sorted sample).
double empirical_quantile(std::span<const double> values, double p);
double empirical_quantile_sorted(std::span<const double> sorted, double p);

}  // namespace varkde

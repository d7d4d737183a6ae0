#include "varkde/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "varkde/error.hpp"

namespace varkde {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delimiter)) fields.push_back(trim(field));
  if (!line.empty() && line.back() == delimiter) fields.emplace_back();
  return fields;
}

bool is_missing(const std::string& field) {
  std::string lower;
  for (char c : field) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower.empty() || lower == "null" || lower == "na" || lower == "nan" || lower == ".";
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::string& source) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  // Yahoo exports use "Adj Close"; match case-insensitively ignoring spaces.
  auto norm = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (!std::isspace(static_cast<unsigned char>(c)) && c != '_')
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
  };
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (norm(header[i]) == norm(name)) return i;
  }
  throw Error(ErrorCode::MalformedInput, source + ": header has no column '" + name + "'");
}

}  // namespace

Date parse_date(const std::string& text, const std::string& format) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) throw Error(ErrorCode::MalformedInput, "cannot parse date '" + text + "' with format " + format);
  using namespace std::chrono;
  const year_month_day ymd{year{tm.tm_year + 1900}, month{static_cast<unsigned>(tm.tm_mon + 1)},
                           day{static_cast<unsigned>(tm.tm_mday)}};
  if (!ymd.ok()) throw Error(ErrorCode::MalformedInput, "invalid calendar date '" + text + "'");
  return sys_days{ymd};
}

std::string format_date(Date date) {
  using namespace std::chrono;
  const year_month_day ymd{date};
  std::ostringstream out;
  out << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
      << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2) << static_cast<unsigned>(ymd.day());
  return out.str();
}

PriceSeries::PriceSeries(std::vector<Date> dates, std::vector<double> prices)
    : dates_(std::move(dates)), prices_(std::move(prices)) {
  if (dates_.size() != prices_.size()) throw Error(ErrorCode::LengthMismatch, "dates and prices differ in length");
  if (prices_.size() < 2) throw Error(ErrorCode::SeriesTooShort, "a price series needs at least two rows");
  for (std::size_t i = 0; i < prices_.size(); ++i) {
    if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i]))
      throw Error(ErrorCode::NonPositivePrice, "price at " + format_date(dates_[i]) + " is not positive");
    if (i > 0 && !(dates_[i - 1] < dates_[i]))
      throw Error(ErrorCode::MalformedInput, "dates must be strictly increasing (at " + format_date(dates_[i]) + ")");
  }
}

ReturnSeries::ReturnSeries(std::vector<Date> dates, std::vector<double> returns)
    : dates_(std::move(dates)), returns_(std::move(returns)) {
  if (dates_.size() != returns_.size()) throw Error(ErrorCode::LengthMismatch, "dates and returns differ in length");
  for (double r : returns_) {
    if (!std::isfinite(r)) throw Error(ErrorCode::NonFinite, "return series contains a non-finite value");
  }
}

ReturnSeries ReturnSeries::from_values(std::vector<double> returns) {
  using namespace std::chrono;
  const sys_days start{year{2000} / January / 1};
  std::vector<Date> dates(returns.size());
  for (std::size_t i = 0; i < dates.size(); ++i) dates[i] = start + days{static_cast<int>(i)};
  return ReturnSeries(std::move(dates), std::move(returns));
}

LoadedPrices parse_prices(const std::string& text, const CsvColumns& columns, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = split(line, columns.delimiter);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::NoValidRows, source + ": file is empty");
  const std::size_t date_col = column_index(header, columns.date_column, source);
  const std::size_t price_col = column_index(header, columns.price_column, source);

  std::vector<std::pair<Date, double>> rows;
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, columns.delimiter);
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() <= std::max(date_col, price_col)) {
      throw Error(ErrorCode::MalformedInput, where + ": expected at least " +
                                                 std::to_string(std::max(date_col, price_col) + 1) + " fields");
    }
    if (is_missing(fields[price_col])) {
      ++dropped;
      continue;
    }
    Date date;
    try {
      date = parse_date(fields[date_col], columns.date_format);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedInput, where + ": " + e.what());
    }
    double price = 0.0;
    std::size_t used = 0;
    try {
      price = std::stod(fields[price_col], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != fields[price_col].size())
      throw Error(ErrorCode::MalformedInput, where + ": price '" + fields[price_col] + "' is not a number");
    if (!(price > 0.0) || !std::isfinite(price))
      throw Error(ErrorCode::NonPositivePrice, where + ": price " + fields[price_col] + " is not positive");
    rows.emplace_back(date, price);
  }
  if (rows.empty()) throw Error(ErrorCode::NoValidRows, source + ": no rows with a valid price");

  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Date> dates;
  std::vector<double> prices;
  dates.reserve(rows.size());
  prices.reserve(rows.size());
  for (const auto& [d, p] : rows) {
    if (!dates.empty() && dates.back() == d)
      throw Error(ErrorCode::MalformedInput, source + ": duplicate date " + format_date(d));
    dates.push_back(d);
    prices.push_back(p);
  }
  return LoadedPrices{PriceSeries(std::move(dates), std::move(prices)), dropped};
}

LoadedPrices load_prices(const std::filesystem::path& path, const CsvColumns& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::UnreadableFile, "failed reading " + path.string());
  return parse_prices(buffer.str(), columns, path.string());
}

ReturnSeries log_returns(const PriceSeries& prices) {
  const auto& p = prices.prices();
  std::vector<double> r(p.size() - 1);
  std::vector<Date> dates(prices.dates().begin() + 1, prices.dates().end());
  for (std::size_t t = 0; t + 1 < p.size(); ++t) r[t] = std::log(p[t + 1]) - std::log(p[t]);
  return ReturnSeries(std::move(dates), std::move(r));
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

double sample_std(std::span<const double> values) { return std::sqrt(sample_variance(values)); }

double empirical_quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in [0,1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return empirical_quantile_sorted(sorted, p);
}

std::pair<std::vector<double>, ScalingParams> standardize(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::SeriesTooShort, "standardize needs at least two values");
  const double m = mean(values);
  const double s = sample_std(values);
  if (!(s > 0.0)) throw Error(ErrorCode::ConstantSeries, "cannot standardize a constant series");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - m) / s;
  return {std::move(out), ScalingParams{m, s}};
}

std::pair<ReturnSeries, ScalingParams> standardize(const ReturnSeries& returns) {
  auto [scaled, params] = standardize(returns.span());
  return {ReturnSeries(returns.dates(), std::move(scaled)), params};
}

ReturnSeries unscale(const ReturnSeries& scaled, const ScalingParams& params) {
  std::vector<double> out(scaled.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = params.unscale(scaled[i]);
  return ReturnSeries(scaled.dates(), std::move(out));
}

void WindowPlan::validate() const {
  if (window_len < kMinWindow)
    throw Error(ErrorCode::InvalidArgument, "window length must be at least " + std::to_string(kMinWindow));
  if (step == 0) throw Error(ErrorCode::InvalidArgument, "window step must be positive");
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "forecast horizon must be positive");
}

std::vector<Window> rolling_windows(std::size_t length, const WindowPlan& plan) {
  plan.validate();
  if (length < plan.window_len + plan.horizon) {
    throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(length) +
                                               " is too short for window " + std::to_string(plan.window_len) +
                                               " and horizon " + std::to_string(plan.horizon));
  }
  std::vector<Window> windows;
  for (std::size_t begin = 0; begin + plan.window_len + plan.horizon <= length; begin += plan.step) {
    const std::size_t end = begin + plan.window_len;
    windows.push_back(Window{begin, end, end + plan.horizon - 1});
  }
  return windows;
}

std::vector<Window> rolling_windows(const ReturnSeries& returns, const WindowPlan& plan) {
  return rolling_windows(returns.size(), plan);
}

DescriptiveStats descriptive_stats(std::span<const double> values) {
  if (values.size() < 4) throw Error(ErrorCode::SeriesTooShort, "descriptive statistics need at least 4 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  DescriptiveStats s;
  s.n = values.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = empirical_quantile_sorted(sorted, 0.25);
  s.median = empirical_quantile_sorted(sorted, 0.5);
  s.q3 = empirical_quantile_sorted(sorted, 0.75);
  s.mean = mean(values);

  const double n = static_cast<double>(values.size());
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  s.variance = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

}  // namespace varkde

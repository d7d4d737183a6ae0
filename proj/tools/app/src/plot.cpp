#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "varkde/error.hpp"
#include "varkde_app/output.hpp"

namespace varkde::app {

namespace {

constexpr double kWidth = 960, kHeight = 480;
constexpr double kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string f2(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

}  // namespace

std::string render_svg(const std::vector<ForecastRow>& rows, const std::string& title) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "forecast set is empty, nothing to plot");

  std::vector<std::string> dates;
  std::map<std::string, double> returns;
  std::vector<std::string> models;
  for (const auto& r : rows) {
    if (!returns.count(r.date)) dates.push_back(r.date);
    returns[r.date] = r.ret;
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
  }
  std::sort(dates.begin(), dates.end());
  std::map<std::string, std::size_t> xi;
  for (std::size_t i = 0; i < dates.size(); ++i) xi[dates[i]] = i;

  double lo = 0.0, hi = 0.0;
  for (const auto& [_, v] : returns) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (const auto& r : rows)
    if (std::isfinite(r.var)) {
      lo = std::min(lo, -r.var);
      hi = std::max(hi, -r.var);
    }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double n = static_cast<double>(std::max<std::size_t>(dates.size() - 1, 1));
  auto X = [&](std::size_t i) { return kLeft + pw * static_cast<double>(i) / n; };
  auto Y = [&](double v) { return kTop + ph * (hi - v) / (hi - lo); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
    << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(title)
    << "</text>\n";

  // axes and ticks
  s << "<g stroke=\"#444\" stroke-width=\"1\" fill=\"none\">\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph << "\"/>\n";
  if (lo < 0.0 && hi > 0.0)
    s << "<line x1=\"" << kLeft << "\" y1=\"" << f2(Y(0)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << f2(Y(0))
      << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
  s << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    char lab[32];
    std::snprintf(lab, sizeof lab, "%.3g", v);
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << f2(Y(v) + 4) << "\" text-anchor=\"end\">" << lab << "</text>\n";
  }
  const std::size_t ticks[] = {0, dates.size() / 2, dates.size() - 1};
  for (std::size_t i : ticks)
    s << "<text x=\"" << f2(X(i)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << xml_escape(dates[i]) << "</text>\n";
  s << "</g>\n";

  // returns
  s << "<polyline class=\"returns\" fill=\"none\" stroke=\"#999\" stroke-width=\"0.8\" points=\"";
  for (std::size_t i = 0; i < dates.size(); ++i) s << (i ? " " : "") << f2(X(i)) << ',' << f2(Y(returns[dates[i]]));
  s << "\"/>\n";

  // one trace per model; infinite bounds break the line
  for (std::size_t m = 0; m < models.size(); ++m) {
    const char* colour = kPalette[m % std::size(kPalette)];
    std::vector<std::pair<std::size_t, double>> pts;
    std::vector<std::size_t> hits;
    for (const auto& r : rows)
      if (r.model == models[m]) {
        pts.emplace_back(xi[r.date], r.var);
        if (r.violation) hits.push_back(xi[r.date]);
      }
    std::sort(pts.begin(), pts.end());
    s << "<g class=\"var-trace\" stroke=\"" << colour << "\" stroke-width=\"1.2\" fill=\"none\">\n";
    std::string seg;
    auto flush = [&] {
      if (!seg.empty()) s << "<polyline points=\"" << seg << "\"/>\n";
      seg.clear();
    };
    for (const auto& [i, v] : pts) {
      if (!std::isfinite(v)) {
        flush();
        continue;
      }
      if (!seg.empty()) seg += ' ';
      seg += f2(X(i)) + "," + f2(Y(-v));
    }
    flush();
    s << "</g>\n<g class=\"violations\" fill=\"" << colour << "\">\n";
    for (std::size_t i : hits)
      s << "<circle cx=\"" << f2(X(i)) << "\" cy=\"" << f2(Y(returns[dates[i]])) << "\" r=\"2.5\"/>\n";
    s << "</g>\n";
  }

  // legend
  s << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t m = 0; m < models.size(); ++m) {
    const double y = kTop + 12 + 18.0 * static_cast<double>(m);
    const double x = kLeft + pw + 14;
    s << "<g class=\"legend-entry\"><line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 22 << "\" y2=\"" << y
      << "\" stroke=\"" << kPalette[m % std::size(kPalette)] << "\" stroke-width=\"2\"/><text x=\"" << x + 28
      << "\" y=\"" << y + 4 << "\">" << xml_escape(models[m]) << "</text></g>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

}  // namespace varkde::app

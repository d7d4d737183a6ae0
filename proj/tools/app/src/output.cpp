#include "varkde_app/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "varkde/error.hpp"

namespace varkde::app {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string alpha_tag(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::string stamp(const RunConfig& cfg) {
  return "# varkde config_hash=" + config_hash(cfg) + " seed=" + std::to_string(cfg.seed) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::UnreadableFile, "cannot write " + path.string());
  f << content;
  if (!f) throw Error(ErrorCode::UnreadableFile, "failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::UnreadableFile, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<ForecastRow> parse_forecasts(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<ForecastRow> rows;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::MalformedInput, source + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kForecastHeader) fail(std::string("expected header '") + kForecastHeader + "'");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 5) fail("expected 5 fields, got " + std::to_string(f.size()));
    ForecastRow r;
    r.date = f[0];
    r.model = f[2];
    try {
      std::size_t used = 0;
      r.ret = std::stod(f[1], &used);
      if (used != f[1].size()) fail("bad return '" + f[1] + "'");
      r.var = std::stod(f[3], &used);
      if (used != f[3].size()) fail("bad VaR '" + f[3] + "'");
    } catch (const std::logic_error&) {
      fail("non-numeric field");
    }
    if (f[4] != "0" && f[4] != "1") fail("violation flag must be 0 or 1");
    r.violation = f[4] == "1";
    rows.push_back(std::move(r));
  }
  if (!header) throw Error(ErrorCode::MalformedInput, source + ": missing header");
  return rows;
}

}  // namespace varkde::app

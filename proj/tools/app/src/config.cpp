#include "varkde_app/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "varkde/error.hpp"
#include "varkde/garch.hpp"
#include "varkde/models.hpp"

namespace varkde::app {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::Config, what); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where + " must be an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, _] : obj.items())
    if (!known.count(k)) bad("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad("'" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

Period parse_period(const json& j, const std::string& where, const std::string& fmt) {
  allow_keys(j, where, {"begin", "end"});
  Period p;
  try {
    if (j.contains("begin")) p.begin = parse_date(get<std::string>(j, "begin", where), fmt);
    if (j.contains("end")) p.end = parse_date(get<std::string>(j, "end", where), fmt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    bad(where + ": " + e.message());
  }
  if (p.begin && p.end && !(*p.begin < *p.end)) bad(where + " must end after it begins");
  return p;
}

tuning::GridPoint parse_point(const json& j, const std::string& where) {
  tuning::GridPoint p;
  p.C = get<double>(j, "C", where);
  p.psi = get<double>(j, "psi", where);
  p.gamma = get<double>(j, "gamma", where);
  tuning::Grid{{p.C}, {p.psi}, {p.gamma}}.validate();
  return p;
}

void parse_tuned(const json& arr, const std::string& where, std::map<double, tuning::GridPoint>& out) {
  if (!arr.is_array()) bad(where + " must be an array");
  for (const auto& e : arr) {
    allow_keys(e, where, {"alpha", "C", "psi", "gamma", "p_cc", "violation_rate"});
    const double alpha = get<double>(e, "alpha", where);
    if (!(alpha > 0.0 && alpha < 1.0)) bad(where + ": alpha must lie in (0, 1)");
    out[alpha] = parse_point(e, where);
  }
}

std::string date_or_null(const std::optional<Date>& d) { return d ? format_date(*d) : std::string(); }

}  // namespace

std::pair<std::size_t, std::size_t> Period::indices(const std::vector<Date>& dates) const {
  std::size_t b = 0, e = dates.size();
  if (begin) b = static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), *begin) - dates.begin());
  if (end) e = static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), *end) - dates.begin());
  return {b, std::max(b, e)};
}

std::vector<std::string> default_roster() {
  std::vector<std::string> r{"SVR-GARCH-KDE"};
  for (const auto& s : models::benchmark_specs()) r.push_back(garch::name(s));
  return r;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.roster = default_roster();
  allow_keys(doc, "config", {"data", "tuning_period", "forecast_period", "alphas", "horizons", "window", "roster",
                             "hybrid", "grid", "spa", "seed", "threads", "out"});

  if (!doc.contains("data")) bad("'data' section is required");
  const json& data = doc.at("data");
  allow_keys(data, "data", {"path", "date_column", "price_column", "date_format", "delimiter"});
  c.data_path = get<std::string>(data, "path", "data");
  if (c.data_path.is_relative()) c.data_path = base_dir / c.data_path;
  read(data, "date_column", "data", c.columns.date_column);
  read(data, "price_column", "data", c.columns.price_column);
  read(data, "date_format", "data", c.columns.date_format);
  if (data.contains("delimiter")) {
    const auto d = get<std::string>(data, "delimiter", "data");
    if (d.size() != 1) bad("data.delimiter must be a single character");
    c.columns.delimiter = d[0];
  }

  if (doc.contains("tuning_period")) c.tuning = parse_period(doc.at("tuning_period"), "tuning_period", "%Y-%m-%d");
  if (doc.contains("forecast_period"))
    c.forecast = parse_period(doc.at("forecast_period"), "forecast_period", "%Y-%m-%d");

  read(doc, "alphas", "config", c.alphas);
  if (c.alphas.empty()) bad("alphas must not be empty");
  for (double a : c.alphas)
    if (!(a > 0.0 && a < 1.0)) bad("alphas must lie in (0, 1)");
  read(doc, "horizons", "config", c.horizons);
  if (c.horizons.empty()) bad("horizons must not be empty");
  for (auto h : c.horizons)
    if (h == 0) bad("horizons must be positive");

  if (doc.contains("window")) {
    const json& w = doc.at("window");
    allow_keys(w, "window", {"length", "step"});
    read(w, "length", "window", c.plan.window_len);
    read(w, "step", "window", c.plan.step);
  }
  try {
    c.plan.validate();
  } catch (const Error& e) {
    bad(std::string("window: ") + e.message());
  }

  read(doc, "roster", "config", c.roster);
  if (c.roster.empty()) bad("roster must not be empty");

  if (doc.contains("hybrid")) {
    const json& h = doc.at("hybrid");
    allow_keys(h, "hybrid", {"orders", "C", "psi", "gamma", "mean_epsilon", "reject_empty_tube", "tuned", "chosen"});
    if (h.contains("orders")) {
      const auto o = get<std::vector<std::size_t>>(h, "orders", "hybrid");
      if (o.size() != 4) bad("hybrid.orders needs four entries [s, d, e, p]");
      c.hybrid.orders = {o[0], o[1], o[2], o[3]};
    }
    tuning::GridPoint p{c.hybrid.var_svr.C, c.hybrid.psi, c.hybrid.var_svr.kernel.gamma};
    read(h, "C", "hybrid", p.C);
    read(h, "psi", "hybrid", p.psi);
    read(h, "gamma", "hybrid", p.gamma);
    c.hybrid = tuning::apply_point(c.hybrid, p);
    if (h.contains("mean_epsilon")) c.hybrid.mean_epsilon = get<double>(h, "mean_epsilon", "hybrid");
    read(h, "reject_empty_tube", "hybrid", c.hybrid.reject_empty_tube);
    if (h.contains("tuned")) parse_tuned(h.at("tuned"), "hybrid.tuned", c.tuned);
    if (h.contains("chosen")) {
      std::filesystem::path p2 = get<std::string>(h, "chosen", "hybrid");
      c.chosen_file = p2.is_relative() ? base_dir / p2 : p2;
    }
  }
  try {
    c.hybrid.validate();
  } catch (const Error& e) {
    bad(std::string("hybrid: ") + e.message());
  }

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    allow_keys(g, "grid", {"C", "psi", "gamma"});
    read(g, "C", "grid", c.grid.C_values);
    read(g, "psi", "grid", c.grid.psi_values);
    read(g, "gamma", "grid", c.grid.gamma_values);
  }
  try {
    c.grid.validate();
  } catch (const Error& e) {
    bad(std::string("grid: ") + e.message());
  }

  if (doc.contains("spa")) {
    const json& s = doc.at("spa");
    allow_keys(s, "spa", {"n_boot", "block_q"});
    read(s, "n_boot", "spa", c.spa.n_boot);
    read(s, "block_q", "spa", c.spa.block_q);
    if (c.spa.n_boot == 0) bad("spa.n_boot must be positive");
    if (!(c.spa.block_q > 0.0 && c.spa.block_q < 1.0)) bad("spa.block_q must lie in (0, 1)");
  }
  read(doc, "seed", "config", c.seed);
  read(doc, "threads", "config", c.threads);
  if (doc.contains("out")) {
    std::filesystem::path o = get<std::string>(doc, "out", "config");
    c.out = o.is_relative() ? base_dir / o : o;
  }
  if (c.chosen_file) load_chosen(c, *c.chosen_file);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, path.string() + ": not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json RunConfig::canonical() const {
  json tuned_j = json::array();
  for (const auto& [a, p] : tuned) tuned_j.push_back({{"alpha", a}, {"C", p.C}, {"psi", p.psi}, {"gamma", p.gamma}});
  const auto& o = hybrid.orders;
  return {{"data",
           {{"path", data_path.filename().string()},
            {"date_column", columns.date_column},
            {"price_column", columns.price_column},
            {"date_format", columns.date_format},
            {"delimiter", std::string(1, columns.delimiter)}}},
          {"tuning_period", {{"begin", date_or_null(tuning.begin)}, {"end", date_or_null(tuning.end)}}},
          {"forecast_period", {{"begin", date_or_null(forecast.begin)}, {"end", date_or_null(forecast.end)}}},
          {"alphas", alphas},
          {"horizons", horizons},
          {"window", {{"length", plan.window_len}, {"step", plan.step}}},
          {"roster", roster},
          {"hybrid",
           {{"orders", {o.s, o.d, o.e, o.p}},
            {"C", hybrid.var_svr.C},
            {"psi", hybrid.psi},
            {"gamma", hybrid.var_svr.kernel.gamma},
            {"mean_epsilon", hybrid.mean_epsilon ? json(*hybrid.mean_epsilon) : json(nullptr)},
            {"reject_empty_tube", hybrid.reject_empty_tube},
            {"tuned", tuned_j}}},
          {"grid", {{"C", grid.C_values}, {"psi", grid.psi_values}, {"gamma", grid.gamma_values}}},
          {"spa", {{"n_boot", spa.n_boot}, {"block_q", spa.block_q}}},
          {"seed", seed}};
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = cfg.canonical().dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

hybrid::HybridConfig hybrid_for(const RunConfig& cfg, double alpha) {
  hybrid::HybridConfig h = cfg.hybrid;
  h.alpha = alpha;
  if (auto it = cfg.tuned.find(alpha); it != cfg.tuned.end()) h = tuning::apply_point(h, it->second);
  return h;
}

void load_chosen(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open chosen-parameters file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, path.string() + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("chosen")) bad(path.string() + " has no 'chosen' list");
  parse_tuned(doc.at("chosen"), path.string(), cfg.tuned);
}

}  // namespace varkde::app

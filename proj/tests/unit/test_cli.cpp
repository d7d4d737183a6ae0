#include <unistd.h>

#include <atomic>
#include <cmath>
#include <map>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "varkde/error.hpp"
#include "varkde/garch.hpp"
#include "varkde_app/commands.hpp"
#include "varkde_app/config.hpp"
#include "varkde_app/output.hpp"

namespace fs = std::filesystem;
using namespace varkde;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("varkde_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Prices on consecutive calendar days from 2010-01-01 with the given log returns.
void write_prices(const fs::path& p, const std::vector<double>& returns) {
  std::ostringstream s;
  s << "date,adjclose\n";
  Date d = parse_date("2010-01-01");
  double price = 100.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", price);
  s << format_date(d) << ',' << buf << '\n';
  for (double r : returns) {
    d = d + std::chrono::days(1);
    price *= std::exp(r);
    std::snprintf(buf, sizeof buf, "%.10f", price);
    s << format_date(d) << ',' << buf << '\n';
  }
  write(p, s.str());
}

std::vector<double> sim_returns(std::size_t n, std::uint64_t seed) {
  garch::GarchParams p;
  p.omega = 0.05;
  p.delta = 0.1;
  p.theta = 0.85;
  p.dist = {6.0, 0.8};
  auto r = garch::simulate({garch::Variant::Standard, garch::Innovation::SkewedT}, p, n, seed);
  for (double& v : r) v *= 0.01;
  return r;
}

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "varkde");
  std::ostringstream out, err;
  const int code = app::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> f;
  std::stringstream ss(s);
  std::string c;
  while (std::getline(ss, c, ',')) f.push_back(c);
  if (!s.empty() && s.back() == ',') f.push_back("");
  return f;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = app::load_config(fs::path(VARKDE_FIXTURE_DIR) / "tuned_sp500.json");
  CHECK(cfg.columns.date_column == "Date");
  CHECK(cfg.columns.price_column == "Adj Close");
  CHECK(cfg.alphas == std::vector<double>{0.01, 0.025, 0.05});
  CHECK(cfg.horizons == std::vector<std::size_t>{1, 10});
  CHECK(cfg.roster.size() == 10);
  CHECK(cfg.roster.front() == "SVR-GARCH-KDE");
  REQUIRE(cfg.tuned.count(0.01) == 1);
  const auto h = app::hybrid_for(cfg, 0.01);
  CHECK(h.var_svr.C == 10.0);
  CHECK(h.mean_svr.C == 10.0);
  CHECK(h.psi == 0.7);
  CHECK(h.var_svr.kernel.gamma == 0.1);
  CHECK(app::hybrid_for(cfg, 0.05).var_svr.C == 1.0);
  CHECK(cfg.seed == 2016);
  CHECK(cfg.data_path.filename() == "prices.csv");
  CHECK(app::config_hash(cfg).size() == 16);

  auto doc = nlohmann::json::parse(slurp(fs::path(VARKDE_FIXTURE_DIR) / "tuned_sp500.json"));
  auto other = app::parse_config(doc, ".");
  other.threads = 4;
  other.out = "elsewhere";
  CHECK(app::config_hash(other) == app::config_hash(cfg));
  other.seed = 1;
  CHECK(app::config_hash(other) != app::config_hash(cfg));

  auto bad = [&](const char* patch) {
    auto d = doc;
    d.merge_patch(nlohmann::json::parse(patch));
    CHECK_THROWS_AS(app::parse_config(d, "."), Error);
  };
  bad(R"({"alphas": [1.5]})");
  bad(R"({"grid": {"C": [-1]}})");
  bad(R"({"grid": {"psi": ["x"]}})");
  bad(R"({"window": {"length": 10}})");
  bad(R"({"roster": []})");
  bad(R"({"surprise": 1})");
  bad(R"({"hybrid": {"orders": [0, 0, 0, 1]}})");
}

TEST_CASE("stats command") {
  TempDir dir;
  write(dir.path / "two.csv", "date,adjclose\n2020-01-01,100\n2020-01-02,101\n");
  write(dir.path / "c.json", R"({"data": {"path": "two.csv"}, "out": "o"})");
  const auto r = cli({"stats", "--config", (dir.path / "c.json").string()});
  CHECK(r.code == 0);
  const auto rows = data_lines(slurp(dir.path / "o" / "stats.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(split(rows[0])[1] == "1");
  CHECK(r.out.find("two") != std::string::npos);

  write_prices(dir.path / "p.csv", sim_returns(500, 3));
  write(dir.path / "s.json", R"({"data": {"path": "p.csv"}, "out": "o2"})");
  CHECK(cli({"--config", (dir.path / "s.json").string(), "stats"}).code == 0);
  const auto f = split(data_lines(slurp(dir.path / "o2" / "stats.csv"))[0]);
  CHECK(f[1] == "500");
  CHECK(f[9] != "NA");
  CHECK(f[10] != "NA");

  write(dir.path / "m.json", R"({"data": {"path": "missing.csv"}})");
  const auto miss = cli({"stats", "--config", (dir.path / "m.json").string()});
  CHECK(miss.code == 2);
  CHECK(miss.err.find("missing.csv") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"stats"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"stats", "--config", "/nonexistent/config.json"}).code == 1);
  TempDir dir;
  write(dir.path / "bad.json", R"({"data": {"path": "p.csv"}, "grid": {"C": ["ten"]}})");
  const auto r = cli({"tune", "--config", (dir.path / "bad.json").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("grid") != std::string::npos);
}

TEST_CASE("backtest outputs") {
  TempDir dir;
  write_prices(dir.path / "p.csv", sim_returns(340, 4));
  write(dir.path / "one.json", R"({"data": {"path": "p.csv"}, "alphas": [0.05], "horizons": [1],
    "window": {"length": 251}, "roster": ["CONSTANT:0.02"], "out": "one"})");
  REQUIRE(cli({"backtest", "--config", (dir.path / "one.json").string()}).code == 0);
  CHECK(data_lines(slurp(dir.path / "one" / "report_h1_a0.05.csv")).size() == 1);

  write(dir.path / "dup.json", R"({"data": {"path": "p.csv"}, "alphas": [0.01, 0.05], "horizons": [1, 10],
    "window": {"length": 251}, "roster": ["GARCH-NORM", "GARCH-NORM", "CONSTANT:0.015"],
    "spa": {"n_boot": 200}, "seed": 5, "out": "dup"})");
  const auto cfg_path = (dir.path / "dup.json").string();
  REQUIRE(cli({"backtest", "--config", cfg_path}).code == 0);
  const auto out = dir.path / "dup";
  for (const char* tag : {"_h1_a0.01", "_h1_a0.05", "_h10_a0.01", "_h10_a0.05"}) {
    const auto report = slurp(out / (std::string("report") + tag + ".csv"));
    const auto rows = data_lines(report);
    REQUIRE(rows.size() == 3);
    std::vector<std::string> garch;
    for (const auto& r : rows)
      if (r.rfind("GARCH-NORM,", 0) == 0) garch.push_back(r);
    REQUIRE(garch.size() == 2);
    CHECK(garch[0] == garch[1]);
    const auto fc = slurp(out / (std::string("forecasts") + tag + ".csv"));
    for (const auto* text : {&report, &fc}) {
      CHECK(text->rfind("# varkde config_hash=", 0) == 0);
      CHECK(text->substr(0, text->find('\n')).find("seed=5") != std::string::npos);
    }
  }

  // percentage columns are the module values scaled by 100
  const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
  const auto& run = doc.at("runs").at(0);
  const auto rows = data_lines(slurp(out / "report_h1_a0.01.csv"));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto f = split(rows[i]);
    const auto& j = run.at("rows").at(i);
    CHECK(f[0] == j.at("model").get<std::string>());
    CHECK(std::abs(std::stod(f[2]) - 100.0 * j.at("violation_rate").get<double>()) <= 1e-9);
    CHECK(std::abs(std::stod(f[4]) - 100.0 * j.at("p_uc").get<double>()) <= 1e-9);
    CHECK(std::abs(std::stod(f[5]) - 100.0 * j.at("p_ind").get<double>()) <= 1e-9);
    CHECK(std::abs(std::stod(f[6]) - 100.0 * j.at("p_cc").get<double>()) <= 1e-9);
    CHECK(std::abs(std::stod(f[3]) - 100.0 * j.at("spa_p").get<double>()) <= 1e-9);
  }

  // byte-identical re-run, independent of the thread count
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(out)) first[e.path().filename().string()] = slurp(e.path());
  REQUIRE(cli({"backtest", "--config", cfg_path, "--threads", "2"}).code == 0);
  for (const auto& [name, text] : first) CHECK(slurp(out / name) == text);

  const auto rep = cli({"report", "--out", out.string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("GARCH-NORM") != std::string::npos);
  CHECK(fs::exists(out / "report.md"));

  const auto spa = cli({"spa", "--config", cfg_path, (out / "forecasts_h1_a0.05.csv").string()});
  CHECK(spa.code == 0);
  // the duplicate roster entries share a name and are read back as one model
  CHECK(data_lines(slurp(out / "spa_forecasts_h1_a0.05.csv")).size() == 2);
}

TEST_CASE("full roster gives ten rows") {
  TempDir dir;
  write_prices(dir.path / "p.csv", sim_returns(290, 6));
  write(dir.path / "c.json", R"({"data": {"path": "p.csv"}, "alphas": [0.01, 0.05], "horizons": [1, 10],
    "window": {"length": 251, "step": 3}, "out": "o"})");
  const auto r = cli({"backtest", "--config", (dir.path / "c.json").string()});
  REQUIRE(r.code == 0);
  for (const char* tag : {"_h1_a0.01", "_h1_a0.05", "_h10_a0.01", "_h10_a0.05"})
    CHECK(data_lines(slurp(dir.path / "o" / (std::string("report") + tag + ".csv"))).size() == 10);
}

TEST_CASE("tune command") {
  TempDir dir;
  write_prices(dir.path / "p.csv", oracle::normal_draws(120, 7));
  write(dir.path / "one.json", R"({"data": {"path": "p.csv"}, "alphas": [0.05], "window": {"length": 60},
    "grid": {"C": [1], "psi": [0.5], "gamma": [1]}, "out": "t1"})");
  REQUIRE(cli({"tune", "--config", (dir.path / "one.json").string()}).code == 0);
  const auto chosen = nlohmann::json::parse(slurp(dir.path / "t1" / "chosen.json"));
  CHECK(chosen.at("chosen").size() == 1);
  CHECK(chosen.at("chosen").at(0).at("C").get<double>() == 1.0);

  write(dir.path / "grid.json", R"({"data": {"path": "p.csv"}, "alphas": [0.05], "window": {"length": 60},
    "grid": {"C": [0.1, 10], "psi": [0.3, 0.6], "gamma": [1]}, "out": "t2"})");
  const auto cfg = (dir.path / "grid.json").string();
  REQUIRE(cli({"tune", "--config", cfg}).code == 0);
  const auto journal = slurp(dir.path / "t2" / "tune_journal.jsonl");
  CHECK(count(journal, "\n") == 4);
  const auto table = slurp(dir.path / "t2" / "tuning_a0.05.csv");
  CHECK(data_lines(table).size() == 4);
  // a second run reuses the journal and writes the same tables
  const auto again = cli({"tune", "--config", cfg});
  REQUIRE(again.code == 0);
  CHECK(again.err.find("4 grid points taken from the journal") != std::string::npos);
  CHECK(slurp(dir.path / "t2" / "tune_journal.jsonl") == journal);
  CHECK(slurp(dir.path / "t2" / "tuning_a0.05.csv") == table);

  // the backtest picks the tuned settings up
  auto c = app::load_config(dir.path / "grid.json");
  app::load_chosen(c, dir.path / "t2" / "chosen.json");
  CHECK(c.tuned.count(0.05) == 1);
}

TEST_CASE("tuning with every point failing is a numerical failure") {
  TempDir dir;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  std::vector<double> r(120);
  for (double& v : r) v = u(rng);
  write_prices(dir.path / "p.csv", r);
  write(dir.path / "c.json", R"({"data": {"path": "p.csv"}, "alphas": [0.05], "window": {"length": 60},
    "grid": {"C": [1], "psi": [0.9], "gamma": [1]}, "out": "o"})");
  const auto res = cli({"tune", "--config", (dir.path / "c.json").string()});
  CHECK(res.code == 3);
  CHECK(res.err.find("AllPointsFailed") != std::string::npos);
}

TEST_CASE("plot command") {
  TempDir dir;
  const std::string head = std::string("# x\n") + app::kForecastHeader + "\n";
  write(dir.path / "empty.csv", head);
  CHECK(cli({"plot", (dir.path / "empty.csv").string(), "-o", (dir.path / "e.svg").string()}).code == 2);
  write(dir.path / "bad.csv", "date,ret\n");
  CHECK(cli({"plot", (dir.path / "bad.csv").string(), "-o", (dir.path / "b.svg").string()}).code == 2);

  write(dir.path / "one.csv", head + "2020-01-01,-0.03,A,0.02,1\n2020-01-02,0.01,A,0.02,0\n");
  REQUIRE(cli({"plot", (dir.path / "one.csv").string(), "-o", (dir.path / "one.svg").string()}).code == 0);
  const auto one = slurp(dir.path / "one.svg");
  CHECK(one.find("version=\"1.1\"") != std::string::npos);
  CHECK(one.find("xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
  CHECK(count(one, "class=\"legend-entry\"") == 1);
  CHECK(count(one, "class=\"var-trace\"") == 1);
  CHECK(count(one, "<circle") == 1);

  write(dir.path / "two.csv", head +
                                  "2020-01-01,-0.03,A,0.02,1\n2020-01-01,-0.03,B,0.04,0\n"
                                  "2020-01-02,0.01,A,0.02,0\n2020-01-02,0.01,B,inf,0\n");
  REQUIRE(cli({"plot", (dir.path / "two.csv").string(), "-o", (dir.path / "two.svg").string()}).code == 0);
  const auto two = slurp(dir.path / "two.svg");
  CHECK(count(two, "class=\"legend-entry\"") == 2);
  CHECK(two.find("inf") == std::string::npos);
  CHECK(two.find("nan") == std::string::npos);
}

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "varkde/error.hpp"
#include "varkde/timeseries.hpp"

using namespace varkde;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("parse_prices reads a two-row file") {
  const auto loaded = parse_prices("date,adjclose\n2020-01-02,100\n2020-01-03,110\n");
  REQUIRE(loaded.series.size() == 2);
  CHECK(loaded.series.prices()[0] == 100.0);
  CHECK(loaded.series.prices()[1] == 110.0);
  CHECK(format_date(loaded.series.dates()[1]) == "2020-01-03");
  CHECK(loaded.dropped_rows == 0);
}

TEST_CASE("parse_prices sorts rows and drops missing prices") {
  const auto loaded =
      parse_prices("Date,Open,Adj Close\n2020-01-06,1,120\n2020-01-02,1,100\n2020-01-03,1,null\n2020-01-04,1,110\n",
                   CsvColumns{"date", "adj_close"});
  REQUIRE(loaded.series.size() == 3);
  CHECK(loaded.series.prices() == std::vector<double>{100.0, 110.0, 120.0});
  CHECK(loaded.dropped_rows == 1);
}

TEST_CASE("parse_prices errors") {
  CHECK(code_of([] { parse_prices("date,adjclose\n2020-01-02,0\n2020-01-03,1\n"); }) == ErrorCode::NonPositivePrice);
  CHECK(code_of([] { parse_prices("date,adjclose\n2020-01-02,abc\n"); }) == ErrorCode::MalformedInput);
  CHECK(code_of([] { parse_prices("date,adjclose\n2020-01-02,NA\n"); }) == ErrorCode::NoValidRows);
  CHECK(code_of([] { parse_prices("date,close\n2020-01-02,1\n"); }) == ErrorCode::MalformedInput);
  CHECK(code_of([] { parse_prices("date,adjclose\n2020-01-02,1\n2020-01-02,2\n"); }) == ErrorCode::MalformedInput);
  CHECK(code_of([] { load_prices("/nonexistent/prices.csv"); }) == ErrorCode::UnreadableFile);
}

TEST_CASE("parse_prices reports the offending line") {
  try {
    parse_prices("date,adjclose\n2020-01-02,1\n2020-01-03,x\n", {}, "prices.csv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("prices.csv:3") != std::string::npos);
  }
}

TEST_CASE("custom delimiter and date format") {
  CsvColumns cols;
  cols.delimiter = ';';
  cols.date_format = "%d.%m.%Y";
  const auto loaded = parse_prices("date;adjclose\n02.01.2020;100\n03.01.2020;50\n", cols);
  const auto r = log_returns(loaded.series);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("load_prices from disk") {
  const auto path = std::filesystem::temp_directory_path() / "varkde_test_prices.csv";
  {
    std::ofstream out(path);
    out << "date,adjclose\n2020-01-02,100\n2020-01-03,110\n";
  }
  const auto loaded = load_prices(path);
  CHECK(loaded.series.size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("log returns") {
  const Date d0 = parse_date("2020-01-01");
  {
    const auto r = log_returns(PriceSeries({d0, d0 + std::chrono::days(1)}, {100.0, 110.0}));
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(0.0953102).epsilon(1e-6));
  }
  {
    const auto r = log_returns(
        PriceSeries({d0, d0 + std::chrono::days(1), d0 + std::chrono::days(2)}, {100.0, 100.0, 100.0}));
    CHECK(r.values() == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("telescoping sum") {
    std::vector<Date> dates;
    std::vector<double> prices;
    double p = 100.0;
    const auto z = oracle::normal_draws(500, 3);
    for (std::size_t i = 0; i < z.size(); ++i) {
      dates.push_back(d0 + std::chrono::days(i));
      p *= std::exp(0.01 * z[i]);
      prices.push_back(p);
    }
    const auto r = log_returns(PriceSeries(dates, prices));
    double sum = 0.0;
    for (double v : r.values()) sum += v;
    CHECK(std::abs(sum - std::log(prices.back() / prices.front())) < 1e-10);
  }
}

TEST_CASE("price series invariants") {
  const Date d0 = parse_date("2020-01-01");
  CHECK(code_of([&] { PriceSeries({d0}, {1.0}); }) == ErrorCode::SeriesTooShort);
  CHECK(code_of([&] { PriceSeries({d0, d0}, {1.0, 2.0}); }) == ErrorCode::MalformedInput);
  CHECK(code_of([&] { PriceSeries({d0, d0 + std::chrono::days(1)}, {1.0, -2.0}); }) == ErrorCode::NonPositivePrice);
}

TEST_CASE("standardize") {
  {
    const auto [s, p] = standardize(ReturnSeries::from_values({1.0, -1.0}));
    CHECK(s[0] == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(s[1] == doctest::Approx(-0.70710678).epsilon(1e-8));
    CHECK(p.mean == 0.0);
    CHECK(p.std == doctest::Approx(std::sqrt(2.0)));
  }
  CHECK(code_of([] { standardize(ReturnSeries::from_values({5.0, 5.0, 5.0})); }) == ErrorCode::ConstantSeries);
  SUBCASE("round trip") {
    const auto r = ReturnSeries::from_values(oracle::normal_draws(300, 11));
    const auto [s, p] = standardize(r);
    CHECK(std::abs(mean(s.span())) < 1e-12);
    CHECK(std::abs(sample_std(s.span()) - 1.0) < 1e-12);
    const auto back = unscale(s, p);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::abs(back[i] - r[i]) < 1e-12);
  }
}

TEST_CASE("rolling windows") {
  WindowPlan plan;
  {
    const auto w = rolling_windows(253, plan);
    REQUIRE(w.size() == 2);
    CHECK(w[0].target == 251);
    CHECK(w[1].target == 252);
    CHECK(w[0].train_end - w[0].train_begin == 251);
  }
  {
    plan.horizon = 10;
    const auto w = rolling_windows(261, plan);
    REQUIRE(w.size() == 1);
    CHECK(w[0].target == 260);
  }
  plan.horizon = 1;
  CHECK(code_of([&] { rolling_windows(251, plan); }) == ErrorCode::SeriesTooShort);
  SUBCASE("count formula") {
    for (std::size_t len : {261u, 300u, 777u})
      for (std::size_t h : {1u, 10u}) {
        WindowPlan p;
        p.horizon = h;
        const auto w = rolling_windows(len, p);
        CHECK(w.size() == len - p.window_len - h + 1);
        for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i].train_begin == w[i - 1].train_begin + 1);
      }
  }
  WindowPlan small;
  small.window_len = 10;
  CHECK(code_of([&] { small.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("descriptive statistics") {
  {
    const std::vector<double> x{-2.0, -1.0, 1.0, 2.0};
    const auto s = descriptive_stats(x);
    CHECK(s.skewness == 0.0);
    CHECK(s.mean == 0.0);
    CHECK(s.median == 0.0);
    CHECK(s.variance == doctest::Approx(10.0 / 3.0));
    CHECK(s.q1 == doctest::Approx(-1.25));
    CHECK(s.q3 == doctest::Approx(1.25));
  }
  CHECK(code_of([] { descriptive_stats(std::vector<double>{1.0, 2.0, 3.0}); }) == ErrorCode::SeriesTooShort);
  SUBCASE("symmetric sample has zero skewness") {
    auto z = oracle::normal_draws(200, 5);
    std::vector<double> sym;
    for (double v : z) {
      sym.push_back(3.0 + v);
      sym.push_back(3.0 - v);
    }
    CHECK(std::abs(descriptive_stats(sym).skewness) < 1e-12);
  }
  SUBCASE("normal sample has excess kurtosis near zero") {
    const auto z = oracle::normal_draws(100000, 17);
    CHECK(std::abs(descriptive_stats(z).kurtosis) < 0.1);
  }
}

TEST_CASE("empirical quantile interpolates linearly") {
  const std::vector<double> x{4.0, 1.0, 3.0, 2.0};
  CHECK(empirical_quantile(x, 0.5) == doctest::Approx(2.5));
  CHECK(empirical_quantile(x, 0.0) == 1.0);
  CHECK(empirical_quantile(x, 1.0) == 4.0);
}

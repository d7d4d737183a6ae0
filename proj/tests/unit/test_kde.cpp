#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "varkde/error.hpp"
#include "varkde/kde.hpp"

using namespace varkde;
using namespace varkde::kde;

TEST_CASE("Silverman bandwidth hand values") {
  const std::vector<double> two{0.0, 1.0};
  const double expected = 0.9 * (0.5 / 1.34) * std::pow(2.0, -0.2);
  CHECK(std::abs(silverman_bandwidth(two) - expected) < 1e-12);
  CHECK(silverman_bandwidth(two) == doctest::Approx(0.29235).epsilon(1e-4));
  const std::vector<double> constant{3.0, 3.0, 3.0};
  CHECK_THROWS_AS(silverman_bandwidth(constant), Error);
  SUBCASE("zero IQR falls back to the standard deviation") {
    const std::vector<double> ties{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0};
    const double sd = std::sqrt((100.0 - 100.0 / 8.0) / 7.0);
    CHECK(std::abs(silverman_bandwidth(ties) - 0.9 * sd * std::pow(8.0, -0.2)) < 1e-12);
  }
  SUBCASE("homogeneous in scale") {
    const auto z = oracle::normal_draws(101, 8);
    std::vector<double> scaled;
    for (double v : z) scaled.push_back(3.5 * v);
    CHECK(std::abs(silverman_bandwidth(scaled) - 3.5 * silverman_bandwidth(z)) < 1e-12);
  }
}

TEST_CASE("density and cdf formulas") {
  const KdeEstimator dup({0.0, 0.0}, 1.0);
  CHECK(dup.density(0.0) == doctest::Approx(0.3989423).epsilon(1e-7));
  CHECK(dup.cdf(0.0) == 0.5);
  const KdeEstimator pm({-1.0, 1.0}, 1.0);
  CHECK(pm.density(0.0) == doctest::Approx(0.2419707).epsilon(1e-7));
  CHECK(pm.cdf(0.0) == 0.5);
  CHECK(pm.cdf(1.0 + 10.0) >= 1.0 - 1e-15);
  CHECK(std::abs(pm.quantile(0.5)) < 1e-9);
  CHECK_THROWS_AS(pm.quantile(0.0), Error);
  CHECK_THROWS_AS(pm.quantile(1.0), Error);
  CHECK_THROWS_AS(KdeEstimator({1.0}, 1.0), Error);
  CHECK_THROWS_AS(KdeEstimator({1.0, 2.0}, 0.0), Error);
}

TEST_CASE("density integrates to one") {
  const auto z = oracle::normal_draws(50, 4);
  const auto e = KdeEstimator::with_silverman(z);
  const double h = e.bandwidth();
  const double total =
      oracle::integrate([&](double x) { return e.density(x); }, e.min() - 40.0 * h, e.max() + 40.0 * h, 1e-13);
  CHECK(std::abs(total - 1.0) < 1e-8);
}

TEST_CASE("cdf is monotone and differentiates to the density") {
  const auto z = oracle::normal_draws(80, 21);
  const auto e = KdeEstimator::with_silverman(z);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(u(rng));
  std::sort(grid.begin(), grid.end());
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(e.cdf(grid[i - 1]) <= e.cdf(grid[i]));
  for (int i = 0; i < 100; ++i) {
    const double x = grid[2 * i];
    const double step = 1e-5;
    const double fd = (e.cdf(x + step) - e.cdf(x - step)) / (2.0 * step);
    CHECK(std::abs(fd - e.density(x)) <= 1e-6 * e.density(x));
  }
}

TEST_CASE("quantile inverts the cdf") {
  const auto z = oracle::normal_draws(120, 9);
  const auto e = KdeEstimator::with_silverman(z);
  for (double x = -2.5; x <= 2.5; x += 0.25) CHECK(std::abs(e.quantile(e.cdf(x)) - x) < 1e-7);
  for (double a : {1e-6, 0.01, 0.05, 0.5, 0.95, 0.999999}) CHECK(std::abs(e.cdf(e.quantile(a)) - a) <= 1e-10);
}

TEST_CASE("quantile shifts with the sample") {
  const auto z = oracle::normal_draws(60, 12);
  std::vector<double> shifted;
  for (double v : z) shifted.push_back(v + 2.75);
  const KdeEstimator a(z, 0.3), b(shifted, 0.3);
  for (double p : {0.01, 0.1, 0.5, 0.9}) CHECK(std::abs(b.quantile(p) - a.quantile(p) - 2.75) < 1e-9);
}

TEST_CASE("large normal sample recovers the normal quantile") {
  const auto e = KdeEstimator::with_silverman(oracle::normal_draws(10000, 31));
  CHECK(std::abs(e.quantile(0.05) - oracle::normal_quantile(0.05)) < 0.05);
}

TEST_CASE("symmetric sample has median zero and cdf one half at zero") {
  const auto z = oracle::normal_draws(100, 44);
  std::vector<double> sym;
  for (double v : z) {
    sym.push_back(v);
    sym.push_back(-v);
  }
  const auto e = KdeEstimator::with_silverman(sym);
  CHECK(std::abs(e.cdf(0.0) - 0.5) < 1e-15);
  CHECK(std::abs(e.quantile(0.5)) < 1e-9);
}

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "reference_hybrid.hpp"
#include "varkde/error.hpp"
#include "varkde/garch.hpp"
#include "varkde/hybrid.hpp"

using namespace varkde;
using namespace varkde::hybrid;

namespace {

std::vector<double> golden_series() {
  std::ifstream in(std::string(VARKDE_FIXTURE_DIR) + "/golden60.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) out.push_back(std::stod(line.substr(line.find(',') + 1)));
  return out;
}

HybridConfig golden_config() {
  HybridConfig cfg;
  cfg.var_svr.C = 10.0;
  cfg.var_svr.kernel.gamma = 0.1;
  cfg.psi = 0.7;
  return cfg;
}

std::vector<double> garch_returns(std::size_t n, std::uint64_t seed) {
  garch::GarchParams p;
  p.omega = 0.05;
  p.delta = 0.1;
  p.theta = 0.85;
  p.dist = {6.0, 0.9};
  return garch::simulate({garch::Variant::Standard, garch::Innovation::SkewedT}, p, n, seed);
}

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

TEST_CASE("epsilon from psi") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  CHECK(epsilon_from_psi(x, 0.5) == doctest::Approx(2.5));
  CHECK(epsilon_from_psi(x, 0.0) == 1.0);
  const std::vector<double> c(7, 0.3);
  for (double psi : {0.0, 0.2, 0.9}) CHECK(epsilon_from_psi(c, psi) == 0.3);
  CHECK(code_of([] { epsilon_from_psi(std::vector<double>{}, 0.5); }) == ErrorCode::EmptyInput);
  CHECK(code_of([&] { epsilon_from_psi(x, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("variance repair") {
  const std::vector<double> a{1.0, -0.2, 2.0};
  CHECK(repair_variance(a, 0.5) == std::vector<double>{1.0, 1.0, 2.0});
  const std::vector<double> b{-0.5, 3.0};
  CHECK(repair_variance(b, 0.7) == std::vector<double>{0.7, 3.0});
  const std::vector<double> c{0.1, 0.2, 0.3};
  CHECK(repair_variance(c, 9.0) == c);
  const std::vector<double> d{0.0, -1.0, 0.4, 0.0};
  CHECK(repair_variance(d, 0.2) == std::vector<double>{0.2, 0.2, 0.4, 0.4});
}

TEST_CASE("configuration checks") {
  const auto r = oracle::normal_draws(200, 1);
  HybridConfig cfg;
  cfg.orders.e = 0;
  CHECK(code_of([&] { fit(r, cfg); }) == ErrorCode::Config);
  cfg.orders = {0, 1, 1, 1};
  CHECK(code_of([&] { fit(r, cfg); }) == ErrorCode::Config);
  cfg.orders = {};
  cfg.psi = 1.0;
  CHECK(code_of([&] { fit(r, cfg); }) == ErrorCode::Config);
  cfg.psi = 0.5;
  CHECK(code_of([&] { fit(std::span<const double>(r.data(), 32), cfg); }) == ErrorCode::SeriesTooShort);
  HybridModel empty;
  CHECK(code_of([&] { forecast(empty, 0.05, 1); }) == ErrorCode::NotFitted);
}

TEST_CASE("golden pipeline matches the straight-line reference") {
  const auto r = golden_series();
  REQUIRE(r.size() == 60);
  const HybridConfig cfg = golden_config();
  const auto m = fit(r, cfg);
  const auto ref = reference::run_hybrid(r, cfg.var_svr.C, cfg.psi, cfg.var_svr.kernel.gamma, 0.05);
  const double tol = 1e-8;
  REQUIRE(m.u_star.values.size() == ref.u_star.size());
  for (std::size_t i = 0; i < ref.u_star.size(); ++i) CHECK(std::abs(m.u_star.values[i] - ref.u_star[i]) <= tol);
  CHECK(std::abs(m.var_ar.epsilon - ref.eps_ar) <= tol);
  CHECK(std::abs(m.var_arma->epsilon - ref.eps_arma) <= tol);
  REQUIRE(m.sigma2_ar.values.size() == ref.sigma2_ar.size());
  for (std::size_t i = 0; i < ref.sigma2_ar.size(); ++i) {
    CHECK(std::abs(m.sigma2_ar.values[i] - ref.sigma2_ar[i]) <= tol);
    CHECK(std::abs(m.nu_hat.values[i] - ref.nu_hat[i]) <= tol);
  }
  REQUIRE(m.sigma2_star.values.size() == ref.sigma2_star.size());
  for (std::size_t i = 0; i < ref.sigma2_star.size(); ++i) {
    CHECK(std::abs(m.sigma2_star.values[i] - ref.sigma2_star[i]) <= tol);
    CHECK(std::abs(m.z_hat.values[i] - ref.z_hat[i]) <= tol);
    CHECK(std::abs(m.z_star.values[i] - ref.z_star[i]) <= tol);
  }
  CHECK(std::abs(m.kde.bandwidth() - ref.bandwidth) <= tol);
  const auto f = forecast(m, 0.05, 1);
  CHECK(std::abs(f.q_hat - ref.q_hat) <= tol);
  CHECK(std::abs(f.sigma_hat - ref.sigma_next) <= tol);
  CHECK(std::abs(f.var_value - ref.var) <= tol);
  CHECK(m.var_ar.model.n_support() > 0);
  CHECK(m.var_arma->model.n_support() > 0);
}

TEST_CASE("residual sample is standardized and has the expected size") {
  const auto r = garch_returns(251, 3);
  const auto m = fit(r, HybridConfig{});
  const auto& z = m.kde.samples();
  CHECK(z.size() == r.size() - 2);
  CHECK(std::abs(mean(z)) < 1e-9);
  CHECK(std::abs(sample_std(z) - 1.0) < 1e-9);
  for (double v : m.sigma2_star.values) CHECK(v > 0.0);
  const auto f = forecast(m, 0.05, 1);
  CHECK(f.var_value == -(f.mu_hat + f.sigma_hat * f.q_hat));
  CHECK(f.target_index == r.size());
}

TEST_CASE("unit-variance noise gives a sane variance level") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = fit(oracle::normal_draws(400, 50 + seed), HybridConfig{});
    const double avg = mean(m.sigma2_star.values);
    CHECK(avg >= 0.5);
    CHECK(avg <= 2.0);
  }
}

TEST_CASE("VaR decreases in alpha") {
  const auto m = fit(garch_returns(300, 4), HybridConfig{});
  const std::vector<double> alphas{0.001, 0.01, 0.025, 0.05, 0.1, 0.3, 0.5};
  const auto fc = forecast(m, alphas, 1);
  for (std::size_t i = 1; i < fc.size(); ++i) CHECK(fc[i - 1].var_value >= fc[i].var_value);
}

TEST_CASE("hand-built constant variance stage") {
  auto m = fit(garch_returns(300, 5), HybridConfig{});
  Stage flat;
  flat.model.scaling = svr::FeatureScaling::identity(2);
  flat.target_scale = {0.36, 1.0};
  m.var_arma = flat;
  const auto f = forecast(m, 0.05, 1);
  CHECK(f.sigma_hat == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(f.var_value == doctest::Approx(-0.6 * m.kde.quantile(0.05)).epsilon(1e-15));
  CHECK(forecast(m, 0.05, 10).sigma_hat == doctest::Approx(0.6).epsilon(1e-15));
  SUBCASE("symmetric residual sample at the median") {
    std::vector<double> sym;
    for (double v : oracle::normal_draws(100, 6)) {
      sym.push_back(v);
      sym.push_back(-v);
    }
    m.kde = kde::KdeEstimator::with_silverman(sym);
    const auto mid = forecast(m, 0.5, 1);
    CHECK(std::abs(mid.var_value) <= mid.sigma_hat * 1e-6);
  }
}

TEST_CASE("multi-step forecast iterates with zero innovations") {
  const auto m = fit(garch_returns(260, 7), HybridConfig{});
  const double w_last = m.u_star.values.back() * m.u_star.values.back();
  const double nu_last = m.nu_hat.values.back();
  std::vector<double> x{w_last, nu_last};
  double s2 = m.var_arma->predict(x);
  if (!(s2 > 0.0)) s2 = m.sigma2_star.values.back();
  CHECK(forecast(m, 0.05, 1).sigma_hat == doctest::Approx(std::sqrt(s2)).epsilon(1e-14));
  for (int k = 1; k < 10; ++k) {
    x = {s2, 0.0};
    const double next = m.var_arma->predict(x);
    if (next > 0.0) s2 = next;
  }
  CHECK(forecast(m, 0.05, 10).sigma_hat == doctest::Approx(std::sqrt(s2)).epsilon(1e-14));
}

TEST_CASE("empty tube is rejected") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> r(200);
  for (double& v : r) v = u(rng);
  HybridConfig cfg;
  cfg.psi = 0.99;
  CHECK(code_of([&] { fit(r, cfg); }) == ErrorCode::DegenerateModel);
  cfg.reject_empty_tube = false;
  const auto m = fit(r, cfg);
  CHECK(m.var_arma->model.n_support() == 0);
}

TEST_CASE("standardized residuals are invariant to the return scale") {
  const auto r = garch_returns(251, 9);
  std::vector<double> scaled;
  for (double v : r) scaled.push_back(250.0 * v);
  const auto a = fit(r, HybridConfig{}), b = fit(scaled, HybridConfig{});
  for (std::size_t i = 0; i < a.z_star.values.size(); ++i)
    CHECK(std::abs(a.z_star.values[i] - b.z_star.values[i]) < 1e-8);
  CHECK(std::abs(forecast(a, 0.01, 1).q_hat - forecast(b, 0.01, 1).q_hat) < 1e-8);
}

TEST_CASE("fits are deterministic and survive serialization") {
  const auto r = garch_returns(251, 10);
  const auto a = fit(r, golden_config()), b = fit(r, golden_config());
  CHECK(forecast(a, 0.01, 1).var_value == forecast(b, 0.01, 1).var_value);
  const std::string doc = to_json(a);
  const auto back = from_json(doc);
  for (std::size_t h : {1u, 10u})
    for (double alpha : {0.01, 0.025, 0.05}) {
      const auto x = forecast(a, alpha, h), y = forecast(back, alpha, h);
      CHECK(x.var_value == y.var_value);
      CHECK(x.sigma_hat == y.sigma_hat);
      CHECK(x.q_hat == y.q_hat);
    }
  CHECK(to_json(back) == doc);
  CHECK(code_of([] { from_json("{\"format\":\"varkde.hybrid\",\"version\":99}"); }) == ErrorCode::MalformedInput);
  CHECK(code_of([] { from_json("not json"); }) == ErrorCode::MalformedInput);
}

TEST_CASE("nonzero mean orders") {
  const auto base = garch_returns(300, 11);
  std::vector<double> r(base.size());
  r[0] = base[0];
  for (std::size_t t = 1; t < r.size(); ++t) r[t] = 0.3 * r[t - 1] + base[t];
  HybridConfig cfg;
  cfg.orders = {1, 1, 1, 1};
  const auto m = fit(r, cfg);
  REQUIRE(m.mean_ar.has_value());
  REQUIRE(m.mean_arma.has_value());
  CHECK(m.u_hat.begin == 1);
  CHECK(m.u_star.begin == 2);
  CHECK(m.kde.samples().size() == r.size() - 4);
  for (std::size_t h : {1u, 10u}) {
    const auto f = forecast(m, 0.05, h);
    CHECK(std::isfinite(f.var_value));
    CHECK(f.sigma_hat > 0.0);
    CHECK(f.var_value == -(f.mu_hat + f.sigma_hat * f.q_hat));
  }
  const auto back = from_json(to_json(m));
  CHECK(forecast(back, 0.05, 10).var_value == forecast(m, 0.05, 10).var_value);
  cfg.orders = {2, 0, 2, 0};
  const auto m2 = fit(r, cfg);
  CHECK(m2.kde.samples().size() == r.size() - 4);
  CHECK_FALSE(m2.var_arma.has_value());
}

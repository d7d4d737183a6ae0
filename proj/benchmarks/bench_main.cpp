#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "varkde/garch.hpp"
#include "varkde/hybrid.hpp"
#include "varkde/kde.hpp"
#include "varkde/svr.hpp"

using namespace varkde;

namespace {

std::vector<double> garch_returns(std::size_t n) {
  garch::GarchParams p;
  p.omega = 0.05;
  p.delta = 0.1;
  p.theta = 0.85;
  return garch::simulate({garch::Variant::Standard, garch::Innovation::Normal}, p, n, 42);
}

}  // namespace

static void BM_SvrFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  svr::FeatureMatrix x(n, 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = g(rng);
    x(i, 1) = g(rng);
    y[i] = x(i, 0) * x(i, 0) + 0.3 * g(rng);
  }
  svr::SvrConfig cfg;
  cfg.epsilon = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(svr::fit(x, y, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SvrFit)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_KdeQuantile(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> z(static_cast<std::size_t>(state.range(0)));
  for (double& v : z) v = g(rng);
  const auto e = kde::KdeEstimator::with_silverman(z);
  for (auto _ : state) benchmark::DoNotOptimize(e.quantile(0.01));
}
BENCHMARK(BM_KdeQuantile)->Arg(250)->Arg(1000)->Arg(4000);

static void BM_GarchFit(benchmark::State& state) {
  const auto r = garch_returns(static_cast<std::size_t>(state.range(0)));
  const garch::GarchSpec spec{static_cast<garch::Variant>(state.range(1)), garch::Innovation::SkewedT};
  for (auto _ : state) benchmark::DoNotOptimize(garch::fit_mle(r, spec));
}
BENCHMARK(BM_GarchFit)
    ->ArgsProduct({{250, 1000}, {static_cast<int>(garch::Variant::Standard), static_cast<int>(garch::Variant::Exponential),
                                 static_cast<int>(garch::Variant::Threshold)}})
    ->Unit(benchmark::kMillisecond);

static void BM_HybridWindow(benchmark::State& state) {
  const auto r = garch_returns(static_cast<std::size_t>(state.range(0)));
  const hybrid::HybridConfig cfg;
  for (auto _ : state) {
    const auto m = hybrid::fit(r, cfg);
    benchmark::DoNotOptimize(hybrid::forecast(m, 0.01, 1));
  }
}
BENCHMARK(BM_HybridWindow)->Arg(251)->Arg(501)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

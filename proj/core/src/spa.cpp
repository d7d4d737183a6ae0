#include "varkde/spa.hpp"

#include <algorithm>
#include <cmath>

#include "varkde/error.hpp"
#include "varkde/parallel.hpp"

namespace varkde::spa {

namespace {

double unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

std::size_t index_below(std::uint64_t x, std::size_t n) {
  return std::min(static_cast<std::size_t>(unit(x) * static_cast<double>(n)), n - 1);
}

}  // namespace

std::vector<std::size_t> stationary_bootstrap(std::size_t n, double q, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  if (n == 0) return idx;
  std::uint64_t state = seed;
  idx[0] = index_below(splitmix64(state), n);
  for (std::size_t t = 1; t < n; ++t) {
    const double u = unit(splitmix64(state));
    const std::uint64_t jump = splitmix64(state);
    idx[t] = u < q ? index_below(jump, n) : (idx[t - 1] + 1) % n;
  }
  return idx;
}

double bootstrap_variance(std::span<const double> d, double q) {
  const std::size_t n = d.size();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(n);
  const double nn = static_cast<double>(n);
  auto gamma = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (d[t] - mean) * (d[t + lag] - mean);
    return s / nn;
  };
  double total = gamma(0);
  const double keep = 1.0 - q;
  for (std::size_t i = 1; i < n; ++i) {
    const double di = static_cast<double>(i);
    const double kappa = (nn - di) / nn * std::pow(keep, di) + di / nn * std::pow(keep, nn - di);
    if (kappa < 1e-300) continue;
    total += 2.0 * kappa * gamma(i);
  }
  return std::max(total, 0.0);
}

SpaResult spa_test(const std::vector<std::vector<double>>& losses, std::size_t benchmark,
                   const SpaOptions& options) {
  if (losses.size() < 2) throw Error(ErrorCode::InvalidArgument, "SPA needs a benchmark and at least one alternative");
  if (benchmark >= losses.size()) throw Error(ErrorCode::InvalidArgument, "SPA benchmark index out of range");
  const std::size_t n = losses[benchmark].size();
  for (const auto& l : losses)
    if (l.size() != n) throw Error(ErrorCode::LengthMismatch, "SPA loss series differ in length");
  if (n < 50) throw Error(ErrorCode::InvalidArgument, "SPA needs at least 50 days, got " + std::to_string(n));
  if (!(options.block_q > 0.0 && options.block_q < 1.0))
    throw Error(ErrorCode::InvalidArgument, "SPA block parameter must lie in (0, 1)");
  if (options.n_boot == 0) throw Error(ErrorCode::InvalidArgument, "SPA needs at least one resample");

  SpaResult result;
  result.n_bootstrap = options.n_boot;
  result.block_param = options.block_q;
  result.seed = options.seed;

  const double nn = static_cast<double>(n);
  const double sqrt_n = std::sqrt(nn);
  struct Alt {
    std::vector<double> d;
    double mean = 0.0;
    double omega = 0.0;
    double centre = 0.0;
  };
  std::vector<Alt> alts;
  bool any_nonzero = false;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    if (k == benchmark) continue;
    Alt a;
    a.d.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      a.d[t] = losses[benchmark][t] - losses[k][t];
      if (a.d[t] != 0.0) any_nonzero = true;
      a.mean += a.d[t];
    }
    a.mean /= nn;
    a.omega = std::sqrt(bootstrap_variance(a.d, options.block_q));
    // a constant, nonzero differential has no sampling noise; keep the ratio finite
    if (!(a.omega > 0.0) && a.mean != 0.0) a.omega = 1e-12 * std::max(1.0, std::abs(a.mean));
    const double threshold = -std::sqrt(a.omega * a.omega / nn * 2.0 * std::log(std::log(nn)));
    a.centre = a.mean >= threshold ? a.mean : 0.0;
    alts.push_back(std::move(a));
  }
  if (!any_nonzero) {
    result.t_stat = 0.0;
    result.p_value = 1.0;
    return result;
  }

  double t_stat = 0.0;
  for (const Alt& a : alts)
    if (a.omega > 0.0) t_stat = std::max(t_stat, sqrt_n * a.mean / a.omega);
  result.t_stat = t_stat;

  std::size_t exceed = 0;
  for (std::size_t b = 0; b < options.n_boot; ++b) {
    const auto idx = stationary_bootstrap(n, options.block_q, derive_seed(options.seed, b));
    double t_boot = 0.0;
    for (const Alt& a : alts) {
      if (!(a.omega > 0.0)) continue;
      double s = 0.0;
      for (std::size_t t : idx) s += a.d[t];
      const double z = sqrt_n * (s / nn - a.centre) / a.omega;
      t_boot = std::max(t_boot, z);
    }
    if (t_boot >= t_stat) ++exceed;
  }
  result.p_value = static_cast<double>(exceed) / static_cast<double>(options.n_boot);
  return result;
}

}  // namespace varkde::spa

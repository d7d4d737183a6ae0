#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace varkde::spa {

struct SpaOptions {
  std::size_t n_boot = 1000;
  double block_q = 0.1;  // mean block length 1 / q
  std::uint64_t seed = 0;
};

struct SpaResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  std::size_t n_bootstrap = 0;
  double block_param = 0.0;
  std::uint64_t seed = 0;
};

/// Stationary-bootstrap index series of length n with restart probability q.
std::vector<std::size_t> stationary_bootstrap(std::size_t n, double q, std::uint64_t seed);

/// Long-run variance of sqrt(n) * mean(d) implied by the stationary bootstrap.
double bootstrap_variance(std::span<const double> d, double q);

/// Superior predictive ability test with the consistent p-value.
/// `losses[k][t]` is the loss of model k on day t. Throws InvalidArgument
/// (fewer than 50 days, no alternative, ragged input).
SpaResult spa_test(const std::vector<std::vector<double>>& losses, std::size_t benchmark,
                   const SpaOptions& options = {});

}  // namespace varkde::spa

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varkde/distributions.hpp"

namespace varkde::garch {

enum class Variant { Standard, Exponential, Threshold };

/// Volatility recursion of order (1,1) with a given innovation law.
struct GarchSpec {
  Variant variant = Variant::Standard;
  Innovation dist = Innovation::Normal;

  friend bool operator==(const GarchSpec&, const GarchSpec&) = default;
};

/// "GARCH-NORM", "EGARCH-STD", "TGARCH-SSTD", ...
std::string name(const GarchSpec& spec);
GarchSpec parse_spec(std::string_view name);

/// Unused fields are ignored: `delta_neg` only for Threshold (where `delta` is
/// the positive-shock coefficient), `rho`/`gamma_e` only for Exponential.
struct GarchParams {
  double omega = 0.0;
  double delta = 0.0;
  double delta_neg = 0.0;
  double theta = 0.0;
  double rho = 0.0;
  double gamma_e = 0.0;
  DistParams dist;
};

/// Throws InvalidArgument (or BadDistParams) when `params` violate the sign and
/// stationarity restrictions of `spec`.
void validate(const GarchSpec& spec, const GarchParams& params);

struct GarchFit {
  GarchSpec spec;
  GarchParams params;
  double loglik = 0.0;
  std::vector<double> sigma2;  // filtered conditional variances, one per return
  double last_return = 0.0;
  double abs_mean = 0.0;  // E|z| of the fitted law
  bool converged = false;
  double grad_norm = 0.0;  // in the transformed, per-observation objective
  std::size_t evaluations = 0;
};

/// Conditional variance path for zero-mean returns (u_t = r_t). The pre-sample
/// state is built from the sample itself: u_0^2 = sigma_0^2 = sample variance
/// (Standard), sigma_0 = sample std with pre-sample u+ and |u-| set to the
/// sample means of the positive and negative parts (Threshold), and
/// ln sigma_0^2 = ln(sample variance) with m(z_0) = 0 (Exponential).
/// Throws NonFiniteRecursion.
std::vector<double> filter_variance(const GarchSpec& spec, const GarchParams& params,
                                    std::span<const double> returns);

double log_likelihood(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns);

struct MleOptions {
  std::size_t min_length = 100;
  std::size_t nm_evaluations = 1500;  // per start
  double grad_tol = 1e-5;
};

/// Maximum-likelihood fit over smoothly transformed parameters: Nelder-Mead
/// from three fixed starts, refined by BFGS from the best simplex point.
/// Returns converged == false when the refined gradient norm exceeds grad_tol.
/// Throws SeriesTooShort, OptimFailed (no finite likelihood anywhere, or a
/// constant series).
GarchFit fit_mle(std::span<const double> returns, const GarchSpec& spec, const MleOptions& options = {});

/// Wraps fixed parameters as a (converged) fit on `returns`.
GarchFit make_fit(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns);

/// sigma_{T+h} from the fit's final state. For h > 1 unknown shocks are
/// replaced by their expectations under the fitted law.
double sigma_forecast(const GarchFit& fit, std::size_t horizon);

/// VaR as a positive loss bound, -sigma_{T+h} F^{-1}(alpha). Throws NotConverged.
double var_forecast(const GarchFit& fit, double alpha, std::size_t horizon);

/// Simulates `n` returns after `burn_in` discarded steps, drawing innovations by
/// inverse CDF from a seeded 64-bit Mersenne Twister.
std::vector<double> simulate(const GarchSpec& spec, const GarchParams& params, std::size_t n, std::uint64_t seed,
                             std::size_t burn_in = 500);

}  // namespace varkde::garch

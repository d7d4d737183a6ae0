#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varkde/kde.hpp"
#include "varkde/svr.hpp"
#include "varkde/timeseries.hpp"

namespace varkde::hybrid {

/// AR/MA orders of the mean (s, d) and variance (e, p) processes.
struct Orders {
  std::size_t s = 0;
  std::size_t d = 0;
  std::size_t e = 1;
  std::size_t p = 1;

  std::size_t total() const noexcept { return s + d + e + p; }
  friend bool operator==(const Orders&, const Orders&) = default;
};

struct HybridConfig {
  Orders orders;
  svr::SvrConfig mean_svr;
  /// C and kernel of both variance stages; epsilon is overwritten per stage by
  /// the psi rule.
  svr::SvrConfig var_svr;
  double psi = 0.5;
  /// Tube width of the mean stages on standardized returns. Unset: the psi rule
  /// applied to the squared standardized returns.
  std::optional<double> mean_epsilon;
  /// Treat a variance stage without support vectors (constant prediction because
  /// every target sits inside the tube) as a failed estimation.
  bool reject_empty_tube = true;
  double alpha = 0.05;

  void validate() const;
};

/// Empirical psi-quantile (linear interpolation) of squared scaled disturbances.
/// psi = 0 gives the sample minimum. Throws EmptyInput, InvalidArgument.
double epsilon_from_psi(std::span<const double> scaled_sq_disturbances, double psi);

/// Replaces each non-positive estimate by the latest positive output value, or by
/// `first_fallback` before any positive value has been seen.
std::vector<double> repair_variance(std::span<const double> estimates, double first_fallback);

/// One fitted SVR stage. Targets are standardized before fitting; `predict`
/// returns values on the original target scale.
struct Stage {
  svr::SvrModel model;
  ScalingParams target_scale;
  double epsilon = 0.0;

  double predict(std::span<const double> features) const { return target_scale.unscale(model.predict(features)); }
};

/// A series defined on training indices [begin, begin + values.size()).
struct Aligned {
  std::size_t begin = 0;
  std::vector<double> values;

  std::size_t end() const noexcept { return begin + values.size(); }
  double at(std::size_t t) const { return values[t - begin]; }
};

struct HybridModel {
  HybridConfig config;
  std::vector<double> returns;  // training sample
  Date last_date{};

  std::optional<Stage> mean_ar;    // AR(s) on returns
  std::optional<Stage> mean_arma;  // ARMA(s, d) with residual lags
  Stage var_ar;                    // AR(e) on squared residuals
  std::optional<Stage> var_arma;   // ARMA(e, p) with innovation lags

  Aligned u_hat;          // residuals of the AR mean stage
  Aligned u_star;         // residuals of the final mean model
  Aligned sigma2_ar;      // AR variance stage fit
  Aligned nu_hat;         // u*^2 - sigma2_ar
  Aligned sigma2_raw;     // final variance stage fit, before repair
  Aligned sigma2_star;    // after repair, strictly positive
  Aligned z_hat;          // u* / sigma*
  Aligned z_star;         // z_hat rescaled to mean 0, std 1
  ScalingParams residual_scale;  // sample mean and std of z_hat
  double repair_fallback = 0.0;
  std::size_t repaired = 0;  // number of replaced variance estimates

  kde::KdeEstimator kde{{0.0, 1.0}, 1.0};
  bool fitted = false;

  std::size_t n_train() const noexcept { return returns.size(); }
};

HybridModel fit(const ReturnSeries& train, const HybridConfig& cfg);
HybridModel fit(std::span<const double> train, const HybridConfig& cfg);

struct VarForecast {
  std::size_t target_index = 0;  // training length - 1 + horizon
  double var_value = 0.0;
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  double q_hat = 0.0;
};

/// One-step forecast uses the known final lags; longer horizons iterate the
/// recursions with future residuals set to zero, future squared residuals
/// replaced by the predicted variance and future innovations nu set to zero.
/// Throws NotFitted.
VarForecast forecast(const HybridModel& model, double alpha, std::size_t horizon);
std::vector<VarForecast> forecast(const HybridModel& model, std::span<const double> alphas, std::size_t horizon);

/// Versioned JSON document holding everything `forecast` needs.
std::string to_json(const HybridModel& model);
HybridModel from_json(const std::string& text);

}  // namespace varkde::hybrid

#pragma once

#include <string>
#include <string_view>

namespace varkde::garch {

enum class Innovation { Normal, StudentT, SkewedT };

std::string_view to_string(Innovation dist) noexcept;
/// Accepts "NORM", "STD", "SSTD" (case-insensitive).
Innovation parse_innovation(std::string_view name);

/// Shape parameters: degrees of freedom `nu` (> 2) for StudentT and SkewedT,
/// skewness `xi` (> 0) for SkewedT. Ignored where not applicable.
struct DistParams {
  double nu = 8.0;
  double xi = 1.0;
};

/// Zero-mean, unit-variance innovation law. The skewed variant is the
/// Fernandez-Steel construction on the standardized Student-t, re-centred and
/// re-scaled so the result again has mean 0 and variance 1.
class InnovationLaw {
 public:
  /// `with_abs_mean = false` skips the quadrature for E|z| (abs_mean() is then 0
  /// for the t laws); the likelihood of the non-exponential variants never needs it.
  InnovationLaw(Innovation dist, DistParams params, bool with_abs_mean = true);

  Innovation kind() const noexcept { return dist_; }
  const DistParams& params() const noexcept { return params_; }

  double log_pdf(double z) const noexcept;
  double pdf(double z) const noexcept;
  double cdf(double z) const;
  double quantile(double p) const;
  /// E|z|; closed form for Normal, 64-point Gauss-Legendre quadrature otherwise.
  double abs_mean() const noexcept { return abs_mean_; }

 private:
  double std_t_log_pdf(double v) const noexcept;  // unit-variance Student-t
  double std_t_cdf(double v) const;
  double std_t_quantile(double p) const;

  Innovation dist_;
  DistParams params_;
  double log_norm_ = 0.0;  // log normalizing constant of the unit-variance t
  double t_scale_ = 1.0;   // sqrt((nu - 2) / nu)
  double skew_mu_ = 0.0;
  double skew_sigma_ = 1.0;
  double skew_g_ = 1.0;  // 2 / (xi + 1 / xi)
  double log_skew_const_ = 0.0;
  double abs_mean_ = 0.0;
};

/// Quantile of the standardized innovation law at level alpha in (0,1).
double dist_quantile(Innovation dist, const DistParams& params, double alpha);

/// Validates shape parameters for `dist`; throws BadDistParams.
void validate(Innovation dist, const DistParams& params);

}  // namespace varkde::garch

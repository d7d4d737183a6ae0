#pragma once

// Scalar special functions shared by the density, volatility and backtest code.

namespace varkde::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal CDF, evaluated as erfc(-x / sqrt 2) / 2.
double normal_cdf(double x) noexcept;

/// Inverse of normal_cdf for p in (0, 1).
double normal_quantile(double p);

/// Survival function P(X > x) of the chi-squared law with `dof` degrees of
/// freedom, via the regularized upper incomplete gamma Q(dof/2, x/2).
double chi2_sf(double x, double dof);

/// CDF and quantile of the (non-standardized) Student-t law with `nu` > 0.
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);

double log_gamma(double x);

}  // namespace varkde::special

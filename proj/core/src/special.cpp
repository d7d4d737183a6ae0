#include "varkde/special.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "varkde/error.hpp"

namespace varkde::special {

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "normal quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorCode::InvalidArgument, "chi-squared dof must be positive");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double student_t_cdf(double x, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::BadDistParams, "Student-t dof must be positive");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "Student-t quantile needs p in (0,1)");
  if (!(nu > 0.0)) throw Error(ErrorCode::BadDistParams, "Student-t dof must be positive");
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

double log_gamma(double x) { return std::lgamma(x); }

}  // namespace varkde::special

#include "varkde/distributions.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <string>

#include "varkde/error.hpp"
#include "varkde/special.hpp"

namespace varkde::garch {

namespace {

struct GaussLegendre64 {
  std::array<double, 64> nodes{};
  std::array<double, 64> weights{};

  GaussLegendre64() {
    constexpr int n = 64;
    for (int i = 0; i < n / 2; ++i) {
      double x = std::cos(special::kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre64& gauss_legendre() {
  static const GaussLegendre64 rule;
  return rule;
}

}  // namespace

std::string_view to_string(Innovation dist) noexcept {
  switch (dist) {
    case Innovation::Normal: return "NORM";
    case Innovation::StudentT: return "STD";
    case Innovation::SkewedT: return "SSTD";
  }
  return "?";
}

Innovation parse_innovation(std::string_view name) {
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "NORM" || upper == "NORMAL") return Innovation::Normal;
  if (upper == "STD" || upper == "T" || upper == "STUDENT") return Innovation::StudentT;
  if (upper == "SSTD" || upper == "SKEWT" || upper == "SKEWED-T") return Innovation::SkewedT;
  throw Error(ErrorCode::Config, "unknown innovation distribution '" + std::string(name) + "'");
}

void validate(Innovation dist, const DistParams& params) {
  if (dist == Innovation::Normal) return;
  if (!(params.nu > 2.0) || !std::isfinite(params.nu))
    throw Error(ErrorCode::BadDistParams, "degrees of freedom must exceed 2");
  if (dist == Innovation::SkewedT && (!(params.xi > 0.0) || !std::isfinite(params.xi)))
    throw Error(ErrorCode::BadDistParams, "skewness parameter must be positive");
}

InnovationLaw::InnovationLaw(Innovation dist, DistParams params, bool with_abs_mean)
    : dist_(dist), params_(params) {
  validate(dist, params);
  if (dist_ == Innovation::Normal) {
    abs_mean_ = std::sqrt(2.0 / special::kPi);
    return;
  }
  const double nu = params_.nu;
  t_scale_ = std::sqrt((nu - 2.0) / nu);
  log_norm_ = special::log_gamma(0.5 * (nu + 1.0)) - special::log_gamma(0.5 * nu) -
              0.5 * std::log(special::kPi * (nu - 2.0));
  if (dist_ == Innovation::SkewedT) {
    const double xi = params_.xi;
    // E|T| of the unit-variance t
    const double m1 = 2.0 * std::sqrt(nu - 2.0) / (nu - 1.0) *
                      std::exp(special::log_gamma(0.5 * (nu + 1.0)) - special::log_gamma(0.5 * nu)) /
                      std::sqrt(special::kPi);
    skew_mu_ = m1 * (xi - 1.0 / xi);
    skew_sigma_ = std::sqrt((1.0 - m1 * m1) * (xi * xi + 1.0 / (xi * xi)) + 2.0 * m1 * m1 - 1.0);
    skew_g_ = 2.0 / (xi + 1.0 / xi);
    log_skew_const_ = std::log(skew_g_) + std::log(skew_sigma_);
  }
  if (!with_abs_mean) return;

  // Zero mean gives E|z| = 2 E[z+] = -2 E[z-]. Integrate over the half-line
  // that does not contain the kink of the skewed density at -mu / sigma, mapped
  // onto [0, 1) by |z| = u / (1 - u).
  const auto& gl = gauss_legendre();
  const double side = -skew_mu_ / skew_sigma_ > 0.0 ? -1.0 : 1.0;
  double total = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double u = 0.5 * gl.nodes[k] + 0.5;
    const double s = u / (1.0 - u);
    const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
    total += gl.weights[k] * s * pdf(side * s) * jac;
  }
  abs_mean_ = total;
}

double InnovationLaw::std_t_log_pdf(double v) const noexcept {
  return log_norm_ - 0.5 * (params_.nu + 1.0) * std::log1p(v * v / (params_.nu - 2.0));
}

double InnovationLaw::std_t_cdf(double v) const { return special::student_t_cdf(v / t_scale_, params_.nu); }

double InnovationLaw::std_t_quantile(double p) const {
  return special::student_t_quantile(p, params_.nu) * t_scale_;
}

double InnovationLaw::log_pdf(double z) const noexcept {
  switch (dist_) {
    case Innovation::Normal:
      return -0.5 * z * z - 0.91893853320467274178;
    case Innovation::StudentT:
      return std_t_log_pdf(z);
    case Innovation::SkewedT: {
      const double w = z * skew_sigma_ + skew_mu_;
      const double v = w >= 0.0 ? w / params_.xi : w * params_.xi;
      return log_skew_const_ + std_t_log_pdf(v);
    }
  }
  return 0.0;
}

double InnovationLaw::pdf(double z) const noexcept { return std::exp(log_pdf(z)); }

double InnovationLaw::cdf(double z) const {
  switch (dist_) {
    case Innovation::Normal:
      return special::normal_cdf(z);
    case Innovation::StudentT:
      return std_t_cdf(z);
    case Innovation::SkewedT: {
      const double xi = params_.xi;
      const double w = z * skew_sigma_ + skew_mu_;
      if (w < 0.0) return skew_g_ / xi * std_t_cdf(w * xi);
      return 1.0 / (xi * xi + 1.0) + skew_g_ * xi * (std_t_cdf(w / xi) - 0.5);
    }
  }
  return 0.0;
}

double InnovationLaw::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "quantile level must lie in (0,1)");
  switch (dist_) {
    case Innovation::Normal:
      return special::normal_quantile(p);
    case Innovation::StudentT:
      return std_t_quantile(p);
    case Innovation::SkewedT: {
      const double xi = params_.xi;
      const double f0 = 1.0 / (xi * xi + 1.0);
      double w = 0.0;
      if (p < f0) {
        w = std_t_quantile(p * xi / skew_g_) / xi;
      } else {
        const double q = std::min(0.5 + (p - f0) / (skew_g_ * xi), 1.0 - 1e-16);
        w = q == 0.5 ? 0.0 : xi * std_t_quantile(q);
      }
      return (w - skew_mu_) / skew_sigma_;
    }
  }
  return 0.0;
}

double dist_quantile(Innovation dist, const DistParams& params, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0,1)");
  return InnovationLaw(dist, params).quantile(alpha);
}

}  // namespace varkde::garch

#pragma once

#include <span>
#include <vector>

namespace varkde::kde {

/// Rule-of-thumb bandwidth 0.9 min(sd, IQR / 1.34) n^(-1/5). Falls back to the
/// standard deviation alone when the IQR is zero; throws DegenerateSample when
/// both are zero.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian kernel density estimator over a fixed sample.
class KdeEstimator {
 public:
  KdeEstimator(std::vector<double> samples, double bandwidth);

  static KdeEstimator with_silverman(std::vector<double> samples);

  double density(double x) const;
  double cdf(double x) const;
  /// Inverts the CDF by bisection on [min - 12h, max + 12h], widening the
  /// bracket when `alpha` falls outside it.
  double quantile(double alpha) const;

  const std::vector<double>& samples() const noexcept { return samples_; }
  double bandwidth() const noexcept { return bandwidth_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }

 private:
  std::vector<double> samples_;
  std::vector<double> sorted_;
  double bandwidth_;
  double min_;
  double max_;
};

}  // namespace varkde::kde

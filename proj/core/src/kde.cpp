#include "varkde/kde.hpp"

#include <algorithm>
#include <cmath>

#include "varkde/error.hpp"
#include "varkde/special.hpp"
#include "varkde/timeseries.hpp"

namespace varkde::kde {

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::DegenerateSample, "bandwidth needs at least two samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = sample_std(sorted);
  const double iqr = empirical_quantile_sorted(sorted, 0.75) - empirical_quantile_sorted(sorted, 0.25);
  if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateSample, "sample is constant");
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

KdeEstimator::KdeEstimator(std::vector<double> samples, double bandwidth)
    : samples_(std::move(samples)), bandwidth_(bandwidth) {
  if (samples_.size() < 2) throw Error(ErrorCode::DegenerateSample, "KDE needs at least two samples");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
    throw Error(ErrorCode::InvalidArgument, "KDE bandwidth must be positive");
  for (double v : samples_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "KDE sample contains a non-finite value");
  }
  sorted_ = samples_;
  std::sort(sorted_.begin(), sorted_.end());
  min_ = sorted_.front();
  max_ = sorted_.back();
}

KdeEstimator KdeEstimator::with_silverman(std::vector<double> samples) {
  const double h = silverman_bandwidth(samples);
  return KdeEstimator(std::move(samples), h);
}

double KdeEstimator::density(double x) const {
  double sum = 0.0;
  for (double xi : samples_) sum += special::normal_pdf((x - xi) / bandwidth_);
  return sum / (bandwidth_ * static_cast<double>(samples_.size()));
}

double KdeEstimator::cdf(double x) const {
  // 0.5 + mean of 0.5 erf((x - x_i) / (h sqrt 2)). The odd erf terms are added in
  // pairs from both ends of the sorted sample, so for a sample symmetric about
  // zero they cancel exactly and cdf(0) is 0.5.
  const double scale = 1.0 / (bandwidth_ * std::sqrt(2.0));
  const std::size_t n = sorted_.size();
  double sum = 0.0;
  for (std::size_t i = 0, j = n - 1; i < j; ++i, --j)
    sum += std::erf((x - sorted_[i]) * scale) + std::erf((x - sorted_[j]) * scale);
  if (n % 2 == 1) sum += std::erf((x - sorted_[n / 2]) * scale);
  return std::clamp(0.5 + 0.5 * sum / static_cast<double>(n), 0.0, 1.0);
}

double KdeEstimator::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "KDE quantile level must lie in (0,1)");
  double lo = min_ - 12.0 * bandwidth_;
  double hi = max_ + 12.0 * bandwidth_;
  double width = hi - lo;
  for (int i = 0; i < 64 && cdf(lo) > alpha; ++i, width *= 2.0) lo -= width;
  for (int i = 0; i < 64 && cdf(hi) < alpha; ++i, width *= 2.0) hi += width;

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < alpha) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-14 * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace varkde::kde

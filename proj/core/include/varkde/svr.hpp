#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace varkde::svr {

/// Row-major dense matrix of feature vectors, one row per observation.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Gaussian RBF kernel exp(-|x - y|^2 / (2 gamma^2)).
struct KernelSpec {
  double gamma = 1.0;
};

double rbf(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y);

/// epsilon-insensitive loss: 0 inside the tube, |r| - epsilon outside.
double eps_loss(double residual, double epsilon) noexcept;

struct SvrConfig {
  double C = 1.0;
  double epsilon = 0.1;
  KernelSpec kernel;
  double tol = 1e-6;
  std::size_t max_iter = 0;  // 0 selects max(10 n^2, 1e5)
  bool standardize_features = true;
  bool polish = true;  // re-solve the KKT system on the detected active set

  void validate() const;
};

/// Per-column affine map applied to inputs before the kernel is evaluated.
struct FeatureScaling {
  std::vector<double> mean;
  std::vector<double> scale;

  static FeatureScaling identity(std::size_t dim);
  static FeatureScaling fit(const FeatureMatrix& x);
  std::vector<double> apply(std::span<const double> x) const;
};

/// Fitted epsilon-SVR, f(x) = sum_i beta_i k(x_i, x) + b.
struct SvrModel {
  FeatureMatrix support;      // support vectors, already scaled
  std::vector<double> beta;   // rho_i - rho_i^*, |beta_i| <= C
  double bias = 0.0;
  KernelSpec kernel;
  FeatureScaling scaling;
  double C = 1.0;
  double epsilon = 0.0;

  // solver diagnostics
  std::size_t n_train = 0;
  std::size_t iterations = 0;
  bool converged = true;
  double kkt_violation = 0.0;
  double dual_objective = 0.0;

  std::size_t dim() const noexcept { return scaling.mean.size(); }
  std::size_t n_support() const noexcept { return beta.size(); }
  double predict(std::span<const double> x) const;
};

/// Solves the epsilon-SVR dual by SMO with maximal-violating-pair selection
/// (second-order working set choice). A run that hits `max_iter` returns the
/// last iterate with `converged == false`.
SvrModel fit(const FeatureMatrix& x, std::span<const double> y, const SvrConfig& cfg);

inline double predict(const SvrModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace varkde::svr

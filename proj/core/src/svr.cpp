#include "varkde/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "varkde/error.hpp"

namespace varkde::svr {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw Error(ErrorCode::DimensionMismatch, "feature data size does not match shape");
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  FeatureMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "ragged feature rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

double rbf(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "rbf arguments differ in dimension");
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * kernel.gamma * kernel.gamma));
}

double eps_loss(double residual, double epsilon) noexcept {
  const double a = std::abs(residual);
  return a <= epsilon ? 0.0 : a - epsilon;
}

void SvrConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorCode::InvalidArgument, "SVR C must be positive");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::InvalidArgument, "SVR epsilon must be >= 0");
  if (!(kernel.gamma > 0.0) || !std::isfinite(kernel.gamma))
    throw Error(ErrorCode::InvalidArgument, "RBF gamma must be positive");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "SVR tolerance must be positive");
}

FeatureScaling FeatureScaling::identity(std::size_t dim) {
  return FeatureScaling{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

FeatureScaling FeatureScaling::fit(const FeatureMatrix& x) {
  FeatureScaling s = identity(x.cols());
  const std::size_t n = x.rows();
  if (n == 0) return s;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x(i, j);
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - m) * (x(i, j) - m);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    s.mean[j] = m;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

std::vector<double> FeatureScaling::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "feature vector has the wrong dimension");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

double SvrModel::predict(std::span<const double> x) const {
  const auto z = scaling.apply(x);
  double f = bias;
  for (std::size_t i = 0; i < beta.size(); ++i) f += beta[i] * rbf(kernel, support.row(i), z);
  return f;
}

namespace {

constexpr double kTau = 1e-12;

enum class Status { Lower, Upper, Free };

// LIBSVM-style formulation over 2n variables: alpha_t for t < n carries
// sign +1 (rho_i), alpha_{t+n} carries sign -1 (rho_i^*).
class SmoSolver {
 public:
  SmoSolver(const std::vector<double>& kernel, std::size_t n, std::span<const double> y, double C, double eps)
      : K_(kernel), n_(n), l_(2 * n), C_(C), alpha_(l_, 0.0), grad_(l_) {
    for (std::size_t i = 0; i < n_; ++i) {
      grad_[i] = eps - y[i];
      grad_[i + n_] = eps + y[i];
    }
  }

  void run(double tol, std::size_t max_iter) {
    while (iterations_ < max_iter) {
      std::size_t i = 0, j = 0;
      if (!select_working_set(tol, i, j)) {
        converged_ = true;
        return;
      }
      ++iterations_;
      update_pair(i, j);
    }
    std::size_t i = 0, j = 0;
    converged_ = !select_working_set(tol, i, j);
  }

  std::vector<double> beta() const {
    std::vector<double> b(n_);
    for (std::size_t i = 0; i < n_; ++i) b[i] = alpha_[i] - alpha_[i + n_];
    return b;
  }

  // b = -rho, averaged over free variables or the midpoint of the KKT interval.
  double bias() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t nr_free = 0;
    for (std::size_t t = 0; t < l_; ++t) {
      const double yG = sign(t) * grad_[t];
      const Status s = status(t);
      if (s == Status::Upper) {
        if (sign(t) < 0) ub = std::min(ub, yG);
        else lb = std::max(lb, yG);
      } else if (s == Status::Lower) {
        if (sign(t) > 0) ub = std::min(ub, yG);
        else lb = std::max(lb, yG);
      } else {
        ++nr_free;
        sum_free += yG;
      }
    }
    const double rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : 0.5 * (ub + lb);
    return -rho;
  }

  std::size_t iterations() const noexcept { return iterations_; }
  bool converged() const noexcept { return converged_; }

 private:
  double sign(std::size_t t) const noexcept { return t < n_ ? 1.0 : -1.0; }
  double k(std::size_t s, std::size_t t) const noexcept { return K_[(s % n_) * n_ + (t % n_)]; }
  double q(std::size_t s, std::size_t t) const noexcept { return sign(s) * sign(t) * k(s, t); }
  bool at_upper(std::size_t t) const noexcept { return alpha_[t] >= C_; }
  bool at_lower(std::size_t t) const noexcept { return alpha_[t] <= 0.0; }
  Status status(std::size_t t) const noexcept {
    if (at_upper(t)) return Status::Upper;
    if (at_lower(t)) return Status::Lower;
    return Status::Free;
  }

  bool select_working_set(double tol, std::size_t& out_i, std::size_t& out_j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t gmax_idx = l_;
    for (std::size_t t = 0; t < l_; ++t) {
      if (sign(t) > 0) {
        if (!at_upper(t) && -grad_[t] >= gmax) {
          gmax = -grad_[t];
          gmax_idx = t;
        }
      } else if (!at_lower(t) && grad_[t] >= gmax) {
        gmax = grad_[t];
        gmax_idx = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t gmin_idx = l_;
    double obj_diff_min = std::numeric_limits<double>::infinity();
    const std::size_t i = gmax_idx;
    for (std::size_t t = 0; t < l_; ++t) {
      if (sign(t) > 0) {
        if (at_lower(t)) continue;
        const double grad_diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
        if (i < l_ && grad_diff > 0.0) {
          const double quad = 2.0 - 2.0 * sign(i) * q(i, t);
          const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_diff_min) {
            gmin_idx = t;
            obj_diff_min = obj;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double grad_diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
        if (i < l_ && grad_diff > 0.0) {
          const double quad = 2.0 + 2.0 * sign(i) * q(i, t);
          const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_diff_min) {
            gmin_idx = t;
            obj_diff_min = obj;
          }
        }
      }
    }
    if (gmax + gmax2 < tol || gmin_idx == l_) return false;
    out_i = i;
    out_j = gmin_idx;
    return true;
  }

  void update_pair(std::size_t i, std::size_t j) {
    const double old_ai = alpha_[i];
    const double old_aj = alpha_[j];
    const double qij = q(i, j);
    if (sign(i) != sign(j)) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = alpha_[i] - alpha_[j];
      alpha_[i] += delta;
      alpha_[j] += delta;
      if (diff > 0.0) {
        if (alpha_[j] < 0.0) {
          alpha_[j] = 0.0;
          alpha_[i] = diff;
        }
      } else if (alpha_[i] < 0.0) {
        alpha_[i] = 0.0;
        alpha_[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha_[i] > C_) {
          alpha_[i] = C_;
          alpha_[j] = C_ - diff;
        }
      } else if (alpha_[j] > C_) {
        alpha_[j] = C_;
        alpha_[i] = C_ + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = alpha_[i] + alpha_[j];
      alpha_[i] -= delta;
      alpha_[j] += delta;
      if (sum > C_) {
        if (alpha_[i] > C_) {
          alpha_[i] = C_;
          alpha_[j] = sum - C_;
        }
      } else if (alpha_[j] < 0.0) {
        alpha_[j] = 0.0;
        alpha_[i] = sum;
      }
      if (sum > C_) {
        if (alpha_[j] > C_) {
          alpha_[j] = C_;
          alpha_[i] = sum - C_;
        }
      } else if (alpha_[i] < 0.0) {
        alpha_[i] = 0.0;
        alpha_[j] = sum;
      }
    }
    const double di = (alpha_[i] - old_ai) * sign(i);
    const double dj = (alpha_[j] - old_aj) * sign(j);
    const double* ki = &K_[(i % n_) * n_];
    const double* kj = &K_[(j % n_) * n_];
    for (std::size_t t = 0; t < n_; ++t) {
      const double c = ki[t] * di + kj[t] * dj;
      grad_[t] += c;
      grad_[t + n_] -= c;
    }
  }

  const std::vector<double>& K_;
  std::size_t n_;
  std::size_t l_;
  double C_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::size_t iterations_ = 0;
  bool converged_ = false;
};

std::vector<double> kernel_matrix(const FeatureMatrix& z, const KernelSpec& kernel) {
  const std::size_t n = z.rows();
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    K[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf(kernel, z.row(i), z.row(j));
      K[i * n + j] = v;
      K[j * n + i] = v;
    }
  }
  return K;
}

std::vector<double> fitted_values(const std::vector<double>& K, std::size_t n, const std::vector<double>& beta,
                                  double b) {
  std::vector<double> f(n, b);
  for (std::size_t j = 0; j < n; ++j) {
    if (beta[j] == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) f[i] += beta[j] * K[i * n + j];
  }
  return f;
}

bool is_bound(double beta, double C) { return std::abs(beta) >= C * (1.0 - 1e-12); }

// Largest violation of the optimality conditions, measured on the residuals.
double kkt_violation(std::span<const double> y, const std::vector<double>& f, const std::vector<double>& beta,
                     double C, double eps) {
  double worst = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    const double r = y[i] - f[i];
    double v = 0.0;
    if (beta[i] == 0.0) v = std::max(0.0, std::abs(r) - eps);
    else if (is_bound(beta[i], C)) v = beta[i] > 0 ? std::max(0.0, eps - r) : std::max(0.0, r + eps);
    else v = beta[i] > 0 ? std::abs(r - eps) : std::abs(r + eps);
    worst = std::max(worst, v);
  }
  return worst;
}

double dual_value(const std::vector<double>& K, std::size_t n, std::span<const double> y,
                  const std::vector<double>& beta, double eps) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (beta[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += K[i * n + j] * beta[j];
    quad += beta[i] * row;
    lin += y[i] * beta[i] - eps * std::abs(beta[i]);
  }
  return -0.5 * quad + lin;
}

// Solves the equality system implied by the active set of `beta`; returns false
// when the result changes the active set or does not improve optimality.
bool polish(const std::vector<double>& K, std::size_t n, std::span<const double> y, double C, double eps,
            std::vector<double>& beta, double& b, double current_violation) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (beta[i] != 0.0 && !is_bound(beta[i], C)) free.push_back(i);
  }
  if (free.empty()) return false;
  const std::size_t m = free.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m + 1));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m + 1));
  double bound_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (is_bound(beta[j], C)) bound_sum += beta[j] > 0 ? C : -C;
  }
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t i = free[a];
    double fixed = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (is_bound(beta[j], C)) fixed += (beta[j] > 0 ? C : -C) * K[i * n + j];
    }
    for (std::size_t c = 0; c < m; ++c) A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = K[i * n + free[c]];
    A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m)) = 1.0;
    rhs(static_cast<Eigen::Index>(a)) = y[i] - (beta[i] > 0 ? eps : -eps) - fixed;
  }
  for (std::size_t c = 0; c < m; ++c) A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) = 1.0;
  rhs(static_cast<Eigen::Index>(m)) = -bound_sum;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;

  std::vector<double> candidate = beta;
  for (std::size_t j = 0; j < n; ++j) {
    if (is_bound(beta[j], C)) candidate[j] = beta[j] > 0 ? C : -C;
  }
  for (std::size_t a = 0; a < m; ++a) {
    const double v = sol(static_cast<Eigen::Index>(a));
    if ((v > 0) != (beta[free[a]] > 0) || v == 0.0 || std::abs(v) >= C) return false;
    candidate[free[a]] = v;
  }
  const double cb = sol(static_cast<Eigen::Index>(m));
  const auto f = fitted_values(K, n, candidate, cb);
  const double violation = kkt_violation(y, f, candidate, C, eps);
  if (!(violation <= current_violation)) return false;
  beta = std::move(candidate);
  b = cb;
  return true;
}

}  // namespace

SvrModel fit(const FeatureMatrix& x, std::span<const double> y, const SvrConfig& cfg) {
  cfg.validate();
  const std::size_t n = x.rows();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "SVR fit needs at least one observation");
  if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "SVR inputs and targets differ in length");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "SVR features contain a non-finite value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "SVR targets contain a non-finite value");
  }

  SvrModel model;
  model.kernel = cfg.kernel;
  model.C = cfg.C;
  model.epsilon = cfg.epsilon;
  model.n_train = n;
  model.scaling = cfg.standardize_features ? FeatureScaling::fit(x) : FeatureScaling::identity(x.cols());

  FeatureMatrix z(n, x.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = model.scaling.apply(x.row(i));
    std::copy(zi.begin(), zi.end(), z.row(i).begin());
  }
  const auto K = kernel_matrix(z, cfg.kernel);

  const std::size_t max_iter =
      cfg.max_iter > 0 ? cfg.max_iter : std::max<std::size_t>(10 * n * n, 100000);
  SmoSolver solver(K, n, y, cfg.C, cfg.epsilon);
  solver.run(cfg.tol, max_iter);

  std::vector<double> beta = solver.beta();
  double b = solver.bias();
  for (double& v : beta) {
    if (std::abs(v) <= cfg.tol) v = 0.0;
  }
  double violation = kkt_violation(y, fitted_values(K, n, beta, b), beta, cfg.C, cfg.epsilon);
  if (cfg.polish && polish(K, n, y, cfg.C, cfg.epsilon, beta, b, violation)) {
    violation = kkt_violation(y, fitted_values(K, n, beta, b), beta, cfg.C, cfg.epsilon);
  }

  model.iterations = solver.iterations();
  model.converged = solver.converged();
  model.kkt_violation = violation;
  model.dual_objective = dual_value(K, n, y, beta, cfg.epsilon);
  model.bias = b;

  std::size_t n_sv = 0;
  for (double v : beta) n_sv += v != 0.0 ? 1 : 0;
  model.support = FeatureMatrix(n_sv, x.cols());
  model.beta.reserve(n_sv);
  for (std::size_t i = 0, k = 0; i < n; ++i) {
    if (beta[i] == 0.0) continue;
    std::copy(z.row(i).begin(), z.row(i).end(), model.support.row(k).begin());
    model.beta.push_back(beta[i]);
    ++k;
  }
  return model;
}

}  // namespace varkde::svr

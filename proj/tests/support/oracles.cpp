#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {

// Euclidean projection onto {0 <= v <= C, sum(v[:n]) - sum(v[n:]) = 0}.
void project(std::vector<double>& v, std::size_t n, double C) {
  auto excess = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::clamp(v[i] - lam, 0.0, C);
    for (std::size_t i = 0; i < n; ++i) s -= std::clamp(v[n + i] + lam, 0.0, C);
    return s;
  };
  double lo = -1.0, hi = 1.0;
  while (excess(lo) < 0.0) lo *= 2.0;
  while (excess(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double lam = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::clamp(v[i] - lam, 0.0, C);
    v[n + i] = std::clamp(v[n + i] + lam, 0.0, C);
  }
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace

double svr_dual_value(const std::vector<double>& K, std::span<const double> y, double eps,
                      std::span<const double> beta) {
  const std::size_t n = y.size();
  double quad = 0.0, lin = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) quad += beta[i] * K[i * n + j] * beta[j];
    lin += y[i] * beta[i];
    l1 += std::abs(beta[i]);
  }
  return -0.5 * quad - eps * l1 + lin;
}

double svr_dual_qp(const std::vector<double>& K, std::span<const double> y, double C, double eps,
                   std::vector<double>* beta_out, int iterations) {
  const std::size_t n = y.size();
  // Lipschitz bound of the gradient: the split Hessian has norm 2 |K|.
  double L = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(K[i * n + j]);
    L = std::max(L, row);
  }
  L = 2.0 * std::max(L, 1e-12);
  std::vector<double> x(2 * n, 0.0), x_prev = x, z = x, grad(2 * n);
  double t = 1.0;
  auto gradient = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < n; ++i) {
      double kb = 0.0;
      for (std::size_t j = 0; j < n; ++j) kb += K[i * n + j] * (v[j] - v[n + j]);
      // ascent direction of the dual in (a, a*)
      grad[i] = -kb - eps + y[i];
      grad[n + i] = kb - eps - y[i];
    }
  };
  auto value = [&](const std::vector<double>& v) {
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = v[i] - v[n + i];
    // the split form's linear term is -eps (a + a*), which equals -eps |b| at the optimum
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) lin += eps * (v[i] + v[n + i]) - eps * std::abs(b[i]);
    return svr_dual_value(K, y, eps, b) - lin;
  };
  double best = value(x);
  std::vector<double> best_x = x;
  for (int it = 0; it < iterations; ++it) {
    gradient(z);
    x_prev = x;
    for (std::size_t k = 0; k < 2 * n; ++k) x[k] = z[k] + grad[k] / L;
    project(x, n, C);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t k = 0; k < 2 * n; ++k) z[k] = x[k] + (t - 1.0) / t_next * (x[k] - x_prev[k]);
    t = t_next;
    if (it % 64 == 0 || it == iterations - 1) {
      const double v = value(x);
      if (v > best) {
        best = v;
        best_x = x;
      } else if (it % 2048 == 0) {
        // adaptive restart keeps the momentum from oscillating at the end
        z = x;
        t = 1.0;
      }
    }
  }
  if (beta_out) {
    beta_out->assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) (*beta_out)[i] = best_x[i] - best_x[n + i];
  }
  return best;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double chi2_sf_1(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(0.5 * x)); }
double chi2_sf_2(double x) { return x <= 0.0 ? 1.0 : std::exp(-0.5 * x); }

double lr_uc(const std::vector<int>& v, double alpha) {
  double n = static_cast<double>(v.size()), x = 0.0;
  for (int f : v) x += f;
  const double pi = x / n;
  const double l0 = xlogy(n - x, 1.0 - alpha) + xlogy(x, alpha);
  const double l1 = xlogy(n - x, 1.0 - pi) + xlogy(x, pi);
  return -2.0 * (l0 - l1);
}

double lr_ind(const std::vector<int>& v) {
  double c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t t = 1; t < v.size(); ++t) c[v[t - 1]][v[t]] += 1.0;
  const double p01 = c[0][0] + c[0][1] > 0 ? c[0][1] / (c[0][0] + c[0][1]) : 0.0;
  const double p11 = c[1][0] + c[1][1] > 0 ? c[1][1] / (c[1][0] + c[1][1]) : 0.0;
  const double p = (c[0][1] + c[1][1]) / static_cast<double>(v.size() - 1);
  const double l0 = xlogy(c[0][0] + c[1][0], 1.0 - p) + xlogy(c[0][1] + c[1][1], p);
  const double l1 = xlogy(c[0][0], 1.0 - p01) + xlogy(c[0][1], p01) + xlogy(c[1][0], 1.0 - p11) + xlogy(c[1][1], p11);
  return -2.0 * (l0 - l1);
}

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

}  // namespace oracle

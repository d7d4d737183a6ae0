#include "varkde/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace varkde::optim {

namespace {

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

std::vector<double> numeric_gradient(const Objective& f, std::span<const double> x, double rel_step,
                                     std::size_t* evaluations) {
  std::vector<double> g(x.size());
  std::vector<double> probe(x.begin(), x.end());
  double f0 = 0.0;
  bool centre_known = false;
  std::size_t extra = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = safe_eval(f, probe);
    probe[i] = x[i] - h;
    const double fm = safe_eval(f, probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
    if (!std::isfinite(g[i])) {
      // one side infeasible: fall back to a one-sided difference on the other
      if (!centre_known) {
        f0 = safe_eval(f, probe);
        centre_known = true;
        ++extra;
      }
      if (std::isfinite(fp) && std::isfinite(f0)) g[i] = (fp - f0) / h;
      else if (std::isfinite(fm) && std::isfinite(f0)) g[i] = (f0 - fm) / h;
      else g[i] = std::isfinite(fp) ? 1e10 : -1e10;
    }
  }
  if (evaluations != nullptr) *evaluations += 2 * x.size() + extra;
  return g;
}

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  Result result;
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
  for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(f, simplex[i]);
  result.evaluations = n + 1;

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto point = [&](double t, std::vector<double>& out) {
    const auto& worst = simplex[order[n]];
    for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (worst[k] - centroid[k]);
  };

  while (result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    ++result.iterations;

    const double f_spread = std::abs(values[order[n]] - values[order[0]]);
    double x_spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k)
        x_spread = std::max(x_spread, std::abs(simplex[order[i]][k] - simplex[order[0]][k]));
    }
    if (std::isfinite(values[order[0]]) && f_spread <= options.f_tol * (1.0 + std::abs(values[order[0]])) &&
        x_spread <= options.x_tol) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[i]][k] / static_cast<double>(n);
    }
    const std::size_t worst = order[n];
    point(-1.0, trial);
    const double fr = safe_eval(f, trial);
    ++result.evaluations;
    if (fr < values[order[0]]) {
      point(-2.0, trial2);
      const double fe = safe_eval(f, trial2);
      ++result.evaluations;
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[order[n - 1]]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    point(outside ? -0.5 : 0.5, trial2);
    const double fc = safe_eval(f, trial2);
    ++result.evaluations;
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    const auto best = simplex[order[0]];
    for (std::size_t i = 1; i <= n; ++i) {
      auto& v = simplex[order[i]];
      for (std::size_t k = 0; k < n; ++k) v[k] = best[k] + 0.5 * (v[k] - best[k]);
      values[order[i]] = safe_eval(f, v);
    }
    result.evaluations += n;
  }

  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  result.x = simplex[static_cast<std::size_t>(best)];
  result.value = values[static_cast<std::size_t>(best)];
  return result;
}

Result bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& options) {
  const std::size_t n = x0.size();
  Result result;
  result.x = std::move(x0);
  result.value = safe_eval(f, result.x);
  result.evaluations = 1;
  if (!std::isfinite(result.value)) return result;

  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  auto g = numeric_gradient(f, result.x, options.fd_step, &result.evaluations);
  std::vector<double> dir(n), x_new(n), s(n), yv(n), Hy(n);

  for (; result.iterations < options.max_iterations; ++result.iterations) {
    result.grad_norm = norm(g);
    if (result.grad_norm <= options.grad_tol) {
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
      dir[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) dir[i] -= H[i * n + j] * g[j];
    }
    double slope = std::inner_product(g.begin(), g.end(), dir.begin(), 0.0);
    if (!(slope < 0.0)) {
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        H[i * n + i] = 1.0;
        dir[i] = -g[i];
      }
      slope = -result.grad_norm * result.grad_norm;
    }
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = result.x[i] + step * dir[i];
      f_new = safe_eval(f, x_new);
      ++result.evaluations;
      if (f_new <= result.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    auto g_new = numeric_gradient(f, x_new, options.fd_step, &result.evaluations);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - result.x[i];
      yv[i] = g_new[i] - g[i];
    }
    const double sy = std::inner_product(s.begin(), s.end(), yv.begin(), 0.0);
    if (sy > 1e-12 * norm(s) * norm(yv)) {
      for (std::size_t i = 0; i < n; ++i) {
        Hy[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * yv[j];
      }
      const double yHy = std::inner_product(yv.begin(), yv.end(), Hy.begin(), 0.0);
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += (1.0 + yHy * rho) * rho * s[i] * s[j] - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
      }
    }
    result.x = x_new;
    result.value = f_new;
    g = std::move(g_new);
  }
  result.grad_norm = norm(g);
  result.converged = result.grad_norm <= options.grad_tol;
  return result;
}

}  // namespace varkde::optim

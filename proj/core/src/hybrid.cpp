#include "varkde/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "varkde/error.hpp"

namespace varkde::hybrid {

namespace {

// Builds the feature matrix for targets t in [begin, end) from lagged columns:
// for each (series, order) pair, lags 1..order of that series.
struct LagSource {
  const Aligned* series;
  std::size_t order;
};

svr::FeatureMatrix lag_features(std::size_t begin, std::size_t end, const std::vector<LagSource>& sources) {
  std::size_t dim = 0;
  for (const auto& s : sources) dim += s.order;
  svr::FeatureMatrix x(end - begin, dim);
  for (std::size_t t = begin; t < end; ++t) {
    std::size_t j = 0;
    for (const auto& s : sources)
      for (std::size_t lag = 1; lag <= s.order; ++lag) x(t - begin, j++) = s.series->at(t - lag);
  }
  return x;
}

Stage fit_stage(const svr::FeatureMatrix& x, std::span<const double> targets, const svr::SvrConfig& base,
                double epsilon) {
  Stage stage;
  auto [scaled, scale] = standardize(targets);
  stage.target_scale = scale;
  stage.epsilon = epsilon;
  svr::SvrConfig cfg = base;
  cfg.epsilon = epsilon;
  stage.model = svr::fit(x, scaled, cfg);
  return stage;
}

std::vector<double> predict_all(const Stage& stage, const svr::FeatureMatrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = stage.predict(x.row(i));
  return out;
}

// psi rule on the squared standardized disturbances of the stage's targets
double variance_epsilon(const Aligned& u_star, std::size_t begin, double psi) {
  std::span<const double> u(u_star.values.data() + (begin - u_star.begin), u_star.end() - begin);
  auto [z, _] = standardize(u);
  for (double& v : z) v *= v;
  return epsilon_from_psi(z, psi);
}

void check_tube(const Stage& stage, const HybridConfig& cfg, const char* which) {
  if (cfg.reject_empty_tube && stage.model.n_support() == 0)
    throw Error(ErrorCode::DegenerateModel, std::string(which) +
                                                " variance stage cannot be estimated: every target lies inside the "
                                                "epsilon tube, no support vectors");
}

Aligned make_aligned(std::size_t begin, std::vector<double> values) { return Aligned{begin, std::move(values)}; }

}  // namespace

void HybridConfig::validate() const {
  if (orders.e < 1) throw Error(ErrorCode::Config, "variance AR order e must be at least 1");
  if (orders.d > 0 && orders.s == 0) throw Error(ErrorCode::Config, "mean MA order d needs a mean AR order s > 0");
  if (!(psi >= 0.0 && psi < 1.0)) throw Error(ErrorCode::Config, "psi must lie in [0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
  if (mean_epsilon && !(*mean_epsilon >= 0.0)) throw Error(ErrorCode::Config, "mean epsilon must be >= 0");
  mean_svr.validate();
  var_svr.validate();
}

double epsilon_from_psi(std::span<const double> values, double psi) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "psi rule needs at least one disturbance");
  if (!(psi >= 0.0 && psi < 1.0)) throw Error(ErrorCode::InvalidArgument, "psi must lie in [0, 1)");
  return empirical_quantile(values, psi);
}

std::vector<double> repair_variance(std::span<const double> estimates, double first_fallback) {
  std::vector<double> out(estimates.begin(), estimates.end());
  double last = first_fallback;
  for (double& v : out) {
    if (v > 0.0 && std::isfinite(v)) last = v;
    else v = last;
  }
  return out;
}

HybridModel fit(const ReturnSeries& train, const HybridConfig& cfg) {
  HybridModel m = fit(train.span(), cfg);
  if (!train.empty()) m.last_date = train.dates().back();
  return m;
}

HybridModel fit(std::span<const double> train, const HybridConfig& cfg) {
  cfg.validate();
  const Orders& o = cfg.orders;
  const std::size_t T = train.size();
  if (T <= o.total() + 30)
    throw Error(ErrorCode::SeriesTooShort, "hybrid fit needs more than " + std::to_string(o.total() + 30) +
                                               " returns, got " + std::to_string(T));
  for (double r : train)
    if (!std::isfinite(r)) throw Error(ErrorCode::NonFinite, "returns must be finite");

  HybridModel m;
  m.config = cfg;
  m.returns.assign(train.begin(), train.end());
  const Aligned r = make_aligned(0, m.returns);

  // mean process
  const std::size_t m0 = o.s + o.d;
  if (o.s == 0) {
    m.u_hat = r;
    m.u_star = r;
  } else {
    double eps = 0.0;
    if (cfg.mean_epsilon) {
      eps = *cfg.mean_epsilon;
    } else {
      auto [z, _] = standardize(std::span<const double>(m.returns.data() + o.s, T - o.s));
      for (double& v : z) v *= v;
      eps = epsilon_from_psi(z, cfg.psi);
    }
    const auto x1 = lag_features(o.s, T, {{&r, o.s}});
    m.mean_ar = fit_stage(x1, std::span<const double>(m.returns.data() + o.s, T - o.s), cfg.mean_svr, eps);
    auto fit1 = predict_all(*m.mean_ar, x1);
    for (std::size_t t = o.s; t < T; ++t) fit1[t - o.s] = m.returns[t] - fit1[t - o.s];
    m.u_hat = make_aligned(o.s, std::move(fit1));
    if (o.d == 0) {
      m.u_star = m.u_hat;
    } else {
      const auto x2 = lag_features(m0, T, {{&r, o.s}, {&m.u_hat, o.d}});
      m.mean_arma = fit_stage(x2, std::span<const double>(m.returns.data() + m0, T - m0), cfg.mean_svr, eps);
      auto fit2 = predict_all(*m.mean_arma, x2);
      for (std::size_t t = m0; t < T; ++t) fit2[t - m0] = m.returns[t] - fit2[t - m0];
      m.u_star = make_aligned(m0, std::move(fit2));
    }
  }

  // variance process on w = u*^2
  std::vector<double> wv(m.u_star.values.size());
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = m.u_star.values[i] * m.u_star.values[i];
  const Aligned w = make_aligned(m.u_star.begin, wv);

  const std::size_t v0 = m0 + o.e;
  {
    const auto x3 = lag_features(v0, T, {{&w, o.e}});
    m.var_ar = fit_stage(x3, std::span<const double>(wv.data() + (v0 - m0), T - v0), cfg.var_svr,
                         variance_epsilon(m.u_star, v0, cfg.psi));
    check_tube(m.var_ar, cfg, "AR");
    auto s2 = predict_all(m.var_ar, x3);
    std::vector<double> nu(s2.size());
    for (std::size_t t = v0; t < T; ++t) nu[t - v0] = w.at(t) - s2[t - v0];
    m.sigma2_ar = make_aligned(v0, std::move(s2));
    m.nu_hat = make_aligned(v0, std::move(nu));
  }
  const std::size_t t0 = v0 + o.p;
  if (o.p == 0) {
    m.sigma2_raw = m.sigma2_ar;
  } else {
    const auto x4 = lag_features(t0, T, {{&w, o.e}, {&m.nu_hat, o.p}});
    m.var_arma = fit_stage(x4, std::span<const double>(wv.data() + (t0 - m0), T - t0), cfg.var_svr,
                           variance_epsilon(m.u_star, t0, cfg.psi));
    check_tube(*m.var_arma, cfg, "ARMA");
    m.sigma2_raw = make_aligned(t0, predict_all(*m.var_arma, x4));
  }

  // the first positive squared residual of the final mean model
  m.repair_fallback = 0.0;
  for (double v : wv)
    if (v > 0.0) {
      m.repair_fallback = v;
      break;
    }
  if (!(m.repair_fallback > 0.0))
    throw Error(ErrorCode::DegenerateModel, "all residuals of the mean model are zero");
  m.sigma2_star = make_aligned(t0, repair_variance(m.sigma2_raw.values, m.repair_fallback));
  for (std::size_t i = 0; i < m.sigma2_raw.values.size(); ++i)
    if (m.sigma2_raw.values[i] != m.sigma2_star.values[i]) ++m.repaired;

  std::vector<double> z(T - t0);
  for (std::size_t t = t0; t < T; ++t) z[t - t0] = m.u_star.at(t) / std::sqrt(m.sigma2_star.at(t));
  m.z_hat = make_aligned(t0, z);
  auto [zs, zscale] = standardize(std::span<const double>(z));
  m.residual_scale = zscale;
  m.z_star = make_aligned(t0, zs);
  m.kde = kde::KdeEstimator::with_silverman(std::move(zs));
  m.fitted = true;
  return m;
}

namespace {

// Rolls the recursions forward `horizon` steps; returns (mu, sigma) at T + horizon.
std::pair<double, double> roll_forward(const HybridModel& m, std::size_t horizon) {
  const Orders& o = m.config.orders;
  const std::size_t T = m.n_train();
  // extend copies of the lagged series with future values
  Aligned r{0, m.returns};
  Aligned u_hat = m.u_hat;
  Aligned u_star = m.u_star;
  Aligned w{m.u_star.begin, {}};
  w.values.reserve(m.u_star.values.size() + horizon);
  for (double v : m.u_star.values) w.values.push_back(v * v);
  Aligned nu = m.nu_hat;
  double last_positive = m.sigma2_star.values.back();

  double mu = 0.0, sigma2 = 0.0;
  std::vector<double> x;
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::size_t t = T + k;
    auto lags = [&x, t](const Aligned& s, std::size_t order) {
      for (std::size_t lag = 1; lag <= order; ++lag) x.push_back(s.at(t - lag));
    };
    mu = 0.0;
    if (m.mean_ar) {
      x.clear();
      lags(r, o.s);
      if (m.mean_arma) {
        lags(u_hat, o.d);
        mu = m.mean_arma->predict(x);
      } else {
        mu = m.mean_ar->predict(x);
      }
    }
    x.clear();
    lags(w, o.e);
    if (m.var_arma) {
      lags(nu, o.p);
      sigma2 = m.var_arma->predict(x);
    } else {
      sigma2 = m.var_ar.predict(x);
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) sigma2 = last_positive;
    last_positive = sigma2;

    r.values.push_back(mu);
    u_hat.values.push_back(0.0);
    u_star.values.push_back(0.0);
    w.values.push_back(sigma2);
    nu.values.push_back(0.0);
  }
  return {mu, std::sqrt(sigma2)};
}

}  // namespace

std::vector<VarForecast> forecast(const HybridModel& model, std::span<const double> alphas, std::size_t horizon) {
  if (!model.fitted) throw Error(ErrorCode::NotFitted, "hybrid model has not been fitted");
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
  const auto [mu, sigma] = roll_forward(model, horizon);
  std::vector<VarForecast> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) {
    VarForecast f;
    f.target_index = model.n_train() - 1 + horizon;
    f.mu_hat = mu;
    f.sigma_hat = sigma;
    f.q_hat = model.kde.quantile(alpha);
    f.var_value = -(f.mu_hat + f.sigma_hat * f.q_hat);
    out.push_back(f);
  }
  return out;
}

VarForecast forecast(const HybridModel& model, double alpha, std::size_t horizon) {
  const double a[] = {alpha};
  return forecast(model, a, horizon).front();
}

}  // namespace varkde::hybrid

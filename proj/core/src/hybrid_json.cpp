#include <nlohmann/json.hpp>

#include "varkde/error.hpp"
#include "varkde/hybrid.hpp"

namespace varkde::hybrid {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "varkde.hybrid";
constexpr int kVersion = 1;

json svr_config_json(const svr::SvrConfig& c) {
  return {{"C", c.C},
          {"epsilon", c.epsilon},
          {"gamma", c.kernel.gamma},
          {"tol", c.tol},
          {"max_iter", c.max_iter},
          {"standardize_features", c.standardize_features},
          {"polish", c.polish}};
}

svr::SvrConfig svr_config_from(const json& j) {
  svr::SvrConfig c;
  c.C = j.at("C").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.kernel.gamma = j.at("gamma").get<double>();
  c.tol = j.at("tol").get<double>();
  c.max_iter = j.at("max_iter").get<std::size_t>();
  c.standardize_features = j.at("standardize_features").get<bool>();
  c.polish = j.at("polish").get<bool>();
  return c;
}

json stage_json(const Stage& s) {
  const auto& m = s.model;
  return {{"support_rows", m.support.rows()},
          {"support_cols", m.support.cols()},
          {"support", m.support.data()},
          {"beta", m.beta},
          {"bias", m.bias},
          {"gamma", m.kernel.gamma},
          {"feature_mean", m.scaling.mean},
          {"feature_scale", m.scaling.scale},
          {"C", m.C},
          {"epsilon", m.epsilon},
          {"n_train", m.n_train},
          {"iterations", m.iterations},
          {"converged", m.converged},
          {"kkt_violation", m.kkt_violation},
          {"dual_objective", m.dual_objective},
          {"target_mean", s.target_scale.mean},
          {"target_std", s.target_scale.std},
          {"stage_epsilon", s.epsilon}};
}

Stage stage_from(const json& j) {
  Stage s;
  auto& m = s.model;
  m.support = svr::FeatureMatrix(j.at("support_rows").get<std::size_t>(), j.at("support_cols").get<std::size_t>(),
                                 j.at("support").get<std::vector<double>>());
  m.beta = j.at("beta").get<std::vector<double>>();
  if (m.beta.size() != m.support.rows())
    throw Error(ErrorCode::MalformedInput, "support vector count does not match coefficients");
  m.bias = j.at("bias").get<double>();
  m.kernel.gamma = j.at("gamma").get<double>();
  m.scaling.mean = j.at("feature_mean").get<std::vector<double>>();
  m.scaling.scale = j.at("feature_scale").get<std::vector<double>>();
  m.C = j.at("C").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  m.n_train = j.at("n_train").get<std::size_t>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.converged = j.at("converged").get<bool>();
  m.kkt_violation = j.at("kkt_violation").get<double>();
  m.dual_objective = j.at("dual_objective").get<double>();
  s.target_scale.mean = j.at("target_mean").get<double>();
  s.target_scale.std = j.at("target_std").get<double>();
  s.epsilon = j.at("stage_epsilon").get<double>();
  return s;
}

json aligned_json(const Aligned& a) { return {{"begin", a.begin}, {"values", a.values}}; }

Aligned aligned_from(const json& j) {
  return Aligned{j.at("begin").get<std::size_t>(), j.at("values").get<std::vector<double>>()};
}

}  // namespace

std::string to_json(const HybridModel& m) {
  if (!m.fitted) throw Error(ErrorCode::NotFitted, "cannot serialize an unfitted model");
  const auto& c = m.config;
  json cfg = {{"orders", {c.orders.s, c.orders.d, c.orders.e, c.orders.p}},
              {"mean_svr", svr_config_json(c.mean_svr)},
              {"var_svr", svr_config_json(c.var_svr)},
              {"psi", c.psi},
              {"mean_epsilon", c.mean_epsilon ? json(*c.mean_epsilon) : json(nullptr)},
              {"reject_empty_tube", c.reject_empty_tube},
              {"alpha", c.alpha}};
  json doc = {{"format", kFormat},
              {"version", kVersion},
              {"config", cfg},
              {"returns", m.returns},
              {"last_date", format_date(m.last_date)},
              {"mean_ar", m.mean_ar ? stage_json(*m.mean_ar) : json(nullptr)},
              {"mean_arma", m.mean_arma ? stage_json(*m.mean_arma) : json(nullptr)},
              {"var_ar", stage_json(m.var_ar)},
              {"var_arma", m.var_arma ? stage_json(*m.var_arma) : json(nullptr)},
              {"u_hat", aligned_json(m.u_hat)},
              {"u_star", aligned_json(m.u_star)},
              {"sigma2_ar", aligned_json(m.sigma2_ar)},
              {"nu_hat", aligned_json(m.nu_hat)},
              {"sigma2_raw", aligned_json(m.sigma2_raw)},
              {"sigma2_star", aligned_json(m.sigma2_star)},
              {"z_hat", aligned_json(m.z_hat)},
              {"z_star", aligned_json(m.z_star)},
              {"residual_mean", m.residual_scale.mean},
              {"residual_std", m.residual_scale.std},
              {"repair_fallback", m.repair_fallback},
              {"repaired", m.repaired},
              {"kde_bandwidth", m.kde.bandwidth()}};
  return doc.dump(1);
}

HybridModel from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat)
      throw Error(ErrorCode::MalformedInput, "not a hybrid model document");
    const int version = doc.at("version").get<int>();
    if (version != kVersion)
      throw Error(ErrorCode::MalformedInput, "unsupported model document version " + std::to_string(version));

    HybridModel m;
    const json& cfg = doc.at("config");
    const auto orders = cfg.at("orders").get<std::vector<std::size_t>>();
    if (orders.size() != 4) throw Error(ErrorCode::MalformedInput, "orders must have four entries");
    m.config.orders = Orders{orders[0], orders[1], orders[2], orders[3]};
    m.config.mean_svr = svr_config_from(cfg.at("mean_svr"));
    m.config.var_svr = svr_config_from(cfg.at("var_svr"));
    m.config.psi = cfg.at("psi").get<double>();
    if (!cfg.at("mean_epsilon").is_null()) m.config.mean_epsilon = cfg.at("mean_epsilon").get<double>();
    m.config.reject_empty_tube = cfg.at("reject_empty_tube").get<bool>();
    m.config.alpha = cfg.at("alpha").get<double>();
    m.config.validate();

    m.returns = doc.at("returns").get<std::vector<double>>();
    m.last_date = parse_date(doc.at("last_date").get<std::string>());
    if (!doc.at("mean_ar").is_null()) m.mean_ar = stage_from(doc.at("mean_ar"));
    if (!doc.at("mean_arma").is_null()) m.mean_arma = stage_from(doc.at("mean_arma"));
    m.var_ar = stage_from(doc.at("var_ar"));
    if (!doc.at("var_arma").is_null()) m.var_arma = stage_from(doc.at("var_arma"));
    m.u_hat = aligned_from(doc.at("u_hat"));
    m.u_star = aligned_from(doc.at("u_star"));
    m.sigma2_ar = aligned_from(doc.at("sigma2_ar"));
    m.nu_hat = aligned_from(doc.at("nu_hat"));
    m.sigma2_raw = aligned_from(doc.at("sigma2_raw"));
    m.sigma2_star = aligned_from(doc.at("sigma2_star"));
    m.z_hat = aligned_from(doc.at("z_hat"));
    m.z_star = aligned_from(doc.at("z_star"));
    m.residual_scale.mean = doc.at("residual_mean").get<double>();
    m.residual_scale.std = doc.at("residual_std").get<double>();
    m.repair_fallback = doc.at("repair_fallback").get<double>();
    m.repaired = doc.at("repaired").get<std::size_t>();
    m.kde = kde::KdeEstimator(m.z_star.values, doc.at("kde_bandwidth").get<double>());
    if (m.sigma2_star.values.empty() || m.u_star.end() != m.returns.size())
      throw Error(ErrorCode::MalformedInput, "model document series are inconsistent");
    m.fitted = true;
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("model document is incomplete: ") + e.what());
  }
}

}  // namespace varkde::hybrid

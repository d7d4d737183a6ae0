#include "varkde/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "varkde/error.hpp"

namespace varkde::models {

HybridAdapter::HybridAdapter(hybrid::HybridConfig cfg, std::string name) : cfg_(std::move(cfg)), name_(std::move(name)) {
  cfg_.validate();
}

std::vector<double> HybridAdapter::forecast(std::span<const double> train, std::span<const double> alphas,
                                            std::size_t horizon) const {
  const auto model = hybrid::fit(train, cfg_);
  const auto fc = hybrid::forecast(model, alphas, horizon);
  std::vector<double> out;
  out.reserve(fc.size());
  for (const auto& f : fc) out.push_back(f.var_value);
  return out;
}

GarchAdapter::GarchAdapter(garch::GarchSpec spec, garch::MleOptions options) : spec_(spec), options_(options) {}

std::vector<double> GarchAdapter::forecast(std::span<const double> train, std::span<const double> alphas,
                                           std::size_t horizon) const {
  const auto fit = garch::fit_mle(train, spec_, options_);
  if (!fit.converged)
    throw Error(ErrorCode::NotConverged, garch::name(spec_) + " likelihood maximization did not converge (gradient norm " +
                                             std::to_string(fit.grad_norm) + ")");
  std::vector<double> out;
  out.reserve(alphas.size());
  const double sigma = garch::sigma_forecast(fit, horizon);
  for (double a : alphas) out.push_back(-sigma * garch::dist_quantile(spec_.dist, fit.params.dist, a));
  return out;
}

ConstantVarAdapter::ConstantVarAdapter(double value, std::string name) : value_(value), name_(std::move(name)) {
  if (std::isnan(value_)) throw Error(ErrorCode::Config, "constant VaR must not be NaN");
  if (name_.empty()) {
    std::ostringstream os;
    os << "CONSTANT:" << value_;
    name_ = os.str();
  }
}

std::vector<double> ConstantVarAdapter::forecast(std::span<const double>, std::span<const double> alphas,
                                                 std::size_t) const {
  return std::vector<double>(alphas.size(), value_);
}

std::vector<garch::GarchSpec> benchmark_specs() {
  std::vector<garch::GarchSpec> out;
  for (auto v : {garch::Variant::Standard, garch::Variant::Exponential, garch::Variant::Threshold})
    for (auto d : {garch::Innovation::Normal, garch::Innovation::StudentT, garch::Innovation::SkewedT})
      out.push_back({v, d});
  return out;
}

std::shared_ptr<const ForecastModel> make_model(const std::string& entry, const hybrid::HybridConfig& hybrid_cfg) {
  if (entry == "SVR-GARCH-KDE") return std::make_shared<HybridAdapter>(hybrid_cfg);
  if (entry.rfind("CONSTANT:", 0) == 0) {
    const std::string value = entry.substr(9);
    if (value == "inf" || value == "+inf")
      return std::make_shared<ConstantVarAdapter>(std::numeric_limits<double>::infinity(), entry);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw Error(ErrorCode::Config, "bad constant VaR value in roster entry '" + entry + "'");
    return std::make_shared<ConstantVarAdapter>(v, entry);
  }
  return std::make_shared<GarchAdapter>(garch::parse_spec(entry));
}

}  // namespace varkde::models

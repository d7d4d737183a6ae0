#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "varkde/garch.hpp"
#include "varkde/hybrid.hpp"

namespace varkde::models {

/// Anything that turns a training slice into VaR forecasts (positive loss
/// bounds) for a set of levels at a given horizon. Implementations are
/// stateless so one instance can serve concurrent windows.
class ForecastModel {
 public:
  virtual ~ForecastModel() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> forecast(std::span<const double> train, std::span<const double> alphas,
                                       std::size_t horizon) const = 0;
};

class HybridAdapter final : public ForecastModel {
 public:
  explicit HybridAdapter(hybrid::HybridConfig cfg, std::string name = "SVR-GARCH-KDE");
  std::string name() const override { return name_; }
  std::vector<double> forecast(std::span<const double> train, std::span<const double> alphas,
                               std::size_t horizon) const override;
  const hybrid::HybridConfig& config() const noexcept { return cfg_; }

 private:
  hybrid::HybridConfig cfg_;
  std::string name_;
};

class GarchAdapter final : public ForecastModel {
 public:
  explicit GarchAdapter(garch::GarchSpec spec, garch::MleOptions options = {});
  std::string name() const override { return garch::name(spec_); }
  std::vector<double> forecast(std::span<const double> train, std::span<const double> alphas,
                               std::size_t horizon) const override;

 private:
  garch::GarchSpec spec_;
  garch::MleOptions options_;
};

/// Returns the same VaR for every window and level.
class ConstantVarAdapter final : public ForecastModel {
 public:
  explicit ConstantVarAdapter(double value, std::string name = "");
  std::string name() const override { return name_; }
  std::vector<double> forecast(std::span<const double> train, std::span<const double> alphas,
                               std::size_t horizon) const override;

 private:
  double value_;
  std::string name_;
};

/// The nine parametric benchmarks: three variants times three innovation laws.
std::vector<garch::GarchSpec> benchmark_specs();

/// Builds a model from a roster entry: "SVR-GARCH-KDE", "GARCH-NORM", ...,
/// "TGARCH-SSTD", or "CONSTANT:<value>". Throws Config.
std::shared_ptr<const ForecastModel> make_model(const std::string& entry, const hybrid::HybridConfig& hybrid_cfg);

}  // namespace varkde::models

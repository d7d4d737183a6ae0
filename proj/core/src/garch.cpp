#include "varkde/garch.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>

#include "varkde/error.hpp"
#include "varkde/optim.hpp"
#include "varkde/timeseries.hpp"

namespace varkde::garch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SampleState {
  double var = 0.0;
  double std = 0.0;
  double pos_mean = 0.0;  // mean of max(u, 0)
  double neg_mean = 0.0;  // mean of max(-u, 0)
};

SampleState sample_state(std::span<const double> u) {
  SampleState s;
  s.var = sample_variance(u);
  s.std = std::sqrt(s.var);
  for (double x : u) {
    if (x > 0.0) s.pos_mean += x;
    else s.neg_mean -= x;
  }
  if (!u.empty()) {
    s.pos_mean /= static_cast<double>(u.size());
    s.neg_mean /= static_cast<double>(u.size());
  }
  return s;
}

// One step of the recursion from (sigma2, u) at t - 1 to sigma2 at t.
double step(const GarchSpec& spec, const GarchParams& p, double abs_mean, double sigma2, double u) {
  switch (spec.variant) {
    case Variant::Standard:
      return p.omega + p.delta * u * u + p.theta * sigma2;
    case Variant::Threshold: {
      const double s = p.omega + p.delta * std::max(u, 0.0) + p.delta_neg * std::max(-u, 0.0) +
                       p.theta * std::sqrt(sigma2);
      return s * s;
    }
    case Variant::Exponential: {
      const double z = u / std::sqrt(sigma2);
      return std::exp(p.omega + p.rho * z + p.gamma_e * (std::abs(z) - abs_mean) + p.theta * std::log(sigma2));
    }
  }
  return 0.0;
}

// Fills `out` with the filtered path; false when it leaves (0, inf).
bool filter_into(const GarchSpec& spec, const GarchParams& p, double abs_mean, const SampleState& s0,
                 std::span<const double> u, std::vector<double>& out) {
  out.resize(u.size());
  if (u.empty()) return true;
  double first = 0.0;
  switch (spec.variant) {
    case Variant::Standard:
      first = p.omega + (p.delta + p.theta) * s0.var;
      break;
    case Variant::Threshold: {
      const double s = p.omega + p.delta * s0.pos_mean + p.delta_neg * s0.neg_mean + p.theta * s0.std;
      first = s * s;
      break;
    }
    case Variant::Exponential:
      first = std::exp(p.omega + p.theta * std::log(s0.var));
      break;
  }
  out[0] = first;
  if (!(first > 0.0) || !std::isfinite(first)) return false;
  for (std::size_t t = 1; t < u.size(); ++t) {
    const double v = step(spec, p, abs_mean, out[t - 1], u[t - 1]);
    if (!(v > 0.0) || !std::isfinite(v)) return false;
    out[t] = v;
  }
  return true;
}

double loglik_of(const InnovationLaw& law, std::span<const double> u, const std::vector<double>& sigma2) {
  double total = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    const double sd = std::sqrt(sigma2[t]);
    total += law.log_pdf(u[t] / sd) - std::log(sd);
  }
  return total;
}

bool uses_nu(Innovation d) { return d != Innovation::Normal; }
bool uses_xi(Innovation d) { return d == Innovation::SkewedT; }

std::size_t core_size(Variant v) { return v == Variant::Standard ? 3 : 4; }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Maps unconstrained coordinates to model parameters. Scale-dependent
// coefficients are expressed relative to the sample moments so the same
// starting coordinates work for any return scale.
struct Transform {
  GarchSpec spec;
  SampleState s0;

  std::size_t size() const {
    return core_size(spec.variant) + (uses_nu(spec.dist) ? 1 : 0) + (uses_xi(spec.dist) ? 1 : 0);
  }

  GarchParams decode(std::span<const double> x) const {
    GarchParams p;
    switch (spec.variant) {
      case Variant::Standard: {
        const double e1 = std::exp(std::clamp(x[1], -40.0, 40.0));
        const double e2 = std::exp(std::clamp(x[2], -40.0, 40.0));
        const double total = 1.0 + e1 + e2;
        p.omega = s0.var * std::exp(x[0]);
        p.delta = e1 / total;
        p.theta = e2 / total;
        break;
      }
      case Variant::Threshold:
        p.omega = s0.std * std::exp(x[0]);
        p.delta = std::exp(std::clamp(x[1], -40.0, 10.0));
        p.delta_neg = std::exp(std::clamp(x[2], -40.0, 10.0));
        p.theta = logistic(x[3]);
        break;
      case Variant::Exponential:
        p.omega = x[0];
        p.rho = x[1];
        p.gamma_e = x[2];
        p.theta = std::tanh(x[3]);
        break;
    }
    std::size_t k = core_size(spec.variant);
    if (uses_nu(spec.dist)) p.dist.nu = 2.0 + std::exp(std::clamp(x[k++], -10.0, 15.0));
    if (uses_xi(spec.dist)) p.dist.xi = std::exp(std::clamp(x[k++], -5.0, 5.0));
    return p;
  }

  std::vector<double> encode(const GarchParams& p) const {
    std::vector<double> x;
    switch (spec.variant) {
      case Variant::Standard: {
        const double rest = 1.0 - p.delta - p.theta;
        x = {std::log(p.omega / s0.var), std::log(p.delta / rest), std::log(p.theta / rest)};
        break;
      }
      case Variant::Threshold:
        x = {std::log(p.omega / s0.std), std::log(p.delta), std::log(p.delta_neg),
             std::log(p.theta / (1.0 - p.theta))};
        break;
      case Variant::Exponential:
        x = {p.omega, p.rho, p.gamma_e, std::atanh(p.theta)};
        break;
    }
    if (uses_nu(spec.dist)) x.push_back(std::log(p.dist.nu - 2.0));
    if (uses_xi(spec.dist)) x.push_back(std::log(p.dist.xi));
    return x;
  }
};

std::array<GarchParams, 3> starting_points(const GarchSpec& spec, const SampleState& s0) {
  std::array<GarchParams, 3> starts{};
  constexpr std::array<std::array<double, 2>, 3> arch_persist{{{0.05, 0.90}, {0.10, 0.80}, {0.20, 0.60}}};
  for (std::size_t i = 0; i < 3; ++i) {
    GarchParams& p = starts[i];
    const double a = arch_persist[i][0], b = arch_persist[i][1];
    switch (spec.variant) {
      case Variant::Standard:
        p.delta = a;
        p.theta = b;
        p.omega = s0.var * (1.0 - a - b);
        break;
      case Variant::Threshold:
        p.delta = a;
        p.delta_neg = a;
        p.theta = b;
        p.omega = s0.std * std::max(0.05, 1.0 - b - a * std::sqrt(2.0 / 3.141592653589793));
        break;
      case Variant::Exponential: {
        constexpr std::array<double, 3> persist{0.95, 0.90, 0.80};
        constexpr std::array<double, 3> rho{-0.05, 0.0, -0.10};
        constexpr std::array<double, 3> gam{0.10, 0.20, 0.15};
        p.theta = persist[i];
        p.rho = rho[i];
        p.gamma_e = gam[i];
        p.omega = (1.0 - p.theta) * std::log(s0.var);
        break;
      }
    }
    p.dist = DistParams{8.0, 1.0};
  }
  return starts;
}

}  // namespace

std::string name(const GarchSpec& spec) {
  std::string out;
  switch (spec.variant) {
    case Variant::Standard: out = "GARCH"; break;
    case Variant::Exponential: out = "EGARCH"; break;
    case Variant::Threshold: out = "TGARCH"; break;
  }
  return out + "-" + std::string(to_string(spec.dist));
}

GarchSpec parse_spec(std::string_view text) {
  std::string upper;
  for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  const auto dash = upper.find('-');
  if (dash == std::string::npos)
    throw Error(ErrorCode::Config, "model name must look like GARCH-NORM, got '" + std::string(text) + "'");
  const std::string head = upper.substr(0, dash);
  GarchSpec spec;
  if (head == "GARCH") spec.variant = Variant::Standard;
  else if (head == "EGARCH") spec.variant = Variant::Exponential;
  else if (head == "TGARCH") spec.variant = Variant::Threshold;
  else throw Error(ErrorCode::Config, "unknown volatility model '" + std::string(text) + "'");
  spec.dist = parse_innovation(upper.substr(dash + 1));
  return spec;
}

void validate(const GarchSpec& spec, const GarchParams& p) {
  validate(spec.dist, p.dist);
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.omega) || !finite(p.delta) || !finite(p.delta_neg) || !finite(p.theta) || !finite(p.rho) ||
      !finite(p.gamma_e))
    throw Error(ErrorCode::InvalidArgument, "GARCH parameters must be finite");
  switch (spec.variant) {
    case Variant::Standard:
      if (!(p.omega > 0.0) || p.delta < 0.0 || p.theta < 0.0 || !(p.delta + p.theta < 1.0))
        throw Error(ErrorCode::InvalidArgument, "GARCH needs omega > 0, delta, theta >= 0, delta + theta < 1");
      break;
    case Variant::Threshold:
      if (!(p.omega > 0.0) || p.delta < 0.0 || p.delta_neg < 0.0 || p.theta < 0.0)
        throw Error(ErrorCode::InvalidArgument, "TGARCH needs omega > 0 and nonnegative coefficients");
      break;
    case Variant::Exponential:
      break;
  }
}

namespace {

bool is_constant(std::span<const double> x) {
  for (double v : x)
    if (v != x.front()) return false;
  return true;
}

}  // namespace

std::vector<double> filter_variance(const GarchSpec& spec, const GarchParams& params,
                                    std::span<const double> returns) {
  validate(spec, params);
  const SampleState s0 = sample_state(returns);
  if (returns.size() > 0 && (!(s0.var > 0.0) || is_constant(returns)))
    throw Error(ErrorCode::ConstantSeries, "cannot initialise the variance filter on a constant series");
  const double abs_mean =
      spec.variant == Variant::Exponential ? InnovationLaw(spec.dist, params.dist).abs_mean() : 0.0;
  std::vector<double> out;
  if (!filter_into(spec, params, abs_mean, s0, returns, out))
    throw Error(ErrorCode::NonFiniteRecursion, "variance recursion left (0, inf) for " + name(spec));
  return out;
}

double log_likelihood(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns) {
  const auto sigma2 = filter_variance(spec, params, returns);
  return loglik_of(InnovationLaw(spec.dist, params.dist, false), returns, sigma2);
}

GarchFit make_fit(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns) {
  if (returns.empty()) throw Error(ErrorCode::EmptyInput, "no returns to filter");
  GarchFit fit;
  fit.spec = spec;
  fit.params = params;
  fit.sigma2 = filter_variance(spec, params, returns);
  const InnovationLaw law(spec.dist, params.dist);
  fit.loglik = loglik_of(law, returns, fit.sigma2);
  fit.abs_mean = law.abs_mean();
  fit.last_return = returns.back();
  fit.converged = true;
  return fit;
}

GarchFit fit_mle(std::span<const double> returns, const GarchSpec& spec, const MleOptions& options) {
  if (returns.size() < options.min_length)
    throw Error(ErrorCode::SeriesTooShort, "GARCH estimation needs at least " + std::to_string(options.min_length) +
                                               " returns, got " + std::to_string(returns.size()));
  for (double r : returns)
    if (!std::isfinite(r)) throw Error(ErrorCode::NonFinite, "returns must be finite");
  const SampleState s0 = sample_state(returns);
  if (!(s0.var > 0.0) || is_constant(returns)) throw Error(ErrorCode::OptimFailed, "likelihood undefined for a constant series");

  const Transform tr{spec, s0};
  const double n = static_cast<double>(returns.size());
  std::vector<double> buffer;
  const optim::Objective objective = [&](std::span<const double> x) {
    for (double v : x)
      if (!std::isfinite(v)) return kInf;
    const GarchParams p = tr.decode(x);
    const InnovationLaw law(spec.dist, p.dist, spec.variant == Variant::Exponential);
    if (!filter_into(spec, p, law.abs_mean(), s0, returns, buffer)) return kInf;
    const double ll = loglik_of(law, returns, buffer);
    return std::isfinite(ll) ? -ll / n : kInf;
  };

  optim::Result best;
  best.value = kInf;
  std::size_t evaluations = 0;
  optim::NelderMeadOptions nm;
  nm.max_evaluations = options.nm_evaluations;
  nm.initial_step = 0.3;
  for (const GarchParams& start : starting_points(spec, s0)) {
    auto r = optim::nelder_mead(objective, tr.encode(start), nm);
    evaluations += r.evaluations;
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value))
    throw Error(ErrorCode::OptimFailed, "no finite likelihood found for " + name(spec));

  optim::BfgsOptions bo;
  bo.grad_tol = options.grad_tol * 0.1;
  optim::Result refined = best;
  for (int round = 0; round < 3; ++round) {
    auto r = optim::bfgs(objective, refined.x, bo);
    evaluations += r.evaluations;
    const bool improved = r.value <= refined.value;
    if (improved) refined = std::move(r);
    if (refined.grad_norm <= options.grad_tol || !improved) break;
  }
  double g2 = 0.0;
  for (double g : optim::numeric_gradient(objective, refined.x, bo.fd_step, &evaluations)) g2 += g * g;
  refined.grad_norm = std::sqrt(g2);

  GarchFit fit;
  fit.spec = spec;
  fit.params = tr.decode(refined.x);
  const InnovationLaw law(spec.dist, fit.params.dist);
  fit.abs_mean = law.abs_mean();
  if (!filter_into(spec, fit.params, fit.abs_mean, s0, returns, fit.sigma2))
    throw Error(ErrorCode::OptimFailed, "optimizer ended at a non-finite variance path for " + name(spec));
  fit.loglik = loglik_of(law, returns, fit.sigma2);
  fit.last_return = returns.back();
  fit.grad_norm = refined.grad_norm;
  fit.converged = std::isfinite(fit.loglik) && refined.grad_norm <= options.grad_tol;
  fit.evaluations = evaluations;
  return fit;
}

double sigma_forecast(const GarchFit& fit, std::size_t horizon) {
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
  if (fit.sigma2.empty()) throw Error(ErrorCode::NotFitted, "fit has no variance path");
  const GarchParams& p = fit.params;
  double s2 = step(fit.spec, p, fit.abs_mean, fit.sigma2.back(), fit.last_return);
  for (std::size_t k = 1; k < horizon; ++k) {
    switch (fit.spec.variant) {
      case Variant::Standard:
        s2 = p.omega + (p.delta + p.theta) * s2;
        break;
      case Variant::Threshold: {
        // E u+ = E|u-| = sigma E|z| / 2 for a zero-mean law
        const double s = p.omega + (0.5 * (p.delta + p.delta_neg) * fit.abs_mean + p.theta) * std::sqrt(s2);
        s2 = s * s;
        break;
      }
      case Variant::Exponential:
        s2 = std::exp(p.omega + p.theta * std::log(s2));
        break;
    }
  }
  if (!(s2 > 0.0) || !std::isfinite(s2))
    throw Error(ErrorCode::NonFiniteRecursion, "variance forecast left (0, inf) for " + name(fit.spec));
  return std::sqrt(s2);
}

double var_forecast(const GarchFit& fit, double alpha, std::size_t horizon) {
  if (!fit.converged) throw Error(ErrorCode::NotConverged, name(fit.spec) + " fit did not converge");
  const double q = dist_quantile(fit.spec.dist, fit.params.dist, alpha);
  return -sigma_forecast(fit, horizon) * q;
}

std::vector<double> simulate(const GarchSpec& spec, const GarchParams& params, std::size_t n, std::uint64_t seed,
                             std::size_t burn_in) {
  validate(spec, params);
  const InnovationLaw law(spec.dist, params.dist);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };

  double s2 = params.omega;
  switch (spec.variant) {
    case Variant::Standard:
      s2 = params.omega / (1.0 - params.delta - params.theta);
      break;
    case Variant::Threshold: {
      const double denom = 1.0 - params.theta - 0.5 * (params.delta + params.delta_neg) * law.abs_mean();
      const double s = denom > 0.0 ? params.omega / denom : params.omega;
      s2 = s * s;
      break;
    }
    case Variant::Exponential:
      s2 = std::abs(params.theta) < 1.0 ? std::exp(params.omega / (1.0 - params.theta)) : std::exp(params.omega);
      break;
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n + burn_in; ++t) {
    const double u = std::sqrt(s2) * law.quantile(uniform());
    if (t >= burn_in) out.push_back(u);
    s2 = step(spec, params, law.abs_mean(), s2, u);
    if (!(s2 > 0.0) || !std::isfinite(s2))
      throw Error(ErrorCode::NonFiniteRecursion, "simulated variance left (0, inf) for " + name(spec));
  }
  return out;
}

}  // namespace varkde::garch

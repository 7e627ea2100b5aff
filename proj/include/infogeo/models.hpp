#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "infogeo/common.hpp"
#include "infogeo/linalg.hpp"
#include "infogeo/odeint.hpp"

namespace infogeo {

enum class Family {
  UnivariateNormal,
  MultivariateNormal2d,
  Linear,
  Exponential,
  Logistic,
  Sir,
};

inline const char* family_to_string(Family f) {
  switch (f) {
    case Family::UnivariateNormal: return "univariate-normal";
    case Family::MultivariateNormal2d: return "multivariate-normal-2d";
    case Family::Linear: return "linear";
    case Family::Exponential: return "exponential";
    case Family::Logistic: return "logistic";
    case Family::Sir: return "sir";
  }
  throw DomainError("unknown family");
}

inline Family family_from_string(const std::string& s) {
  if (s == "univariate-normal") return Family::UnivariateNormal;
  if (s == "multivariate-normal-2d") return Family::MultivariateNormal2d;
  if (s == "linear") return Family::Linear;
  if (s == "exponential") return Family::Exponential;
  if (s == "logistic") return Family::Logistic;
  if (s == "sir") return Family::Sir;
  throw DomainError("unknown model family '" + s + "'");
}

/// Full parameter set of a family, canonical order; sigma always last.
inline const std::vector<std::string>& family_parameters(Family f) {
  static const std::vector<std::string> univ = {"mu", "sigma"};
  static const std::vector<std::string> mvn = {"mu1", "mu2", "sigma"};
  static const std::vector<std::string> growth = {"a", "C0", "sigma"};
  static const std::vector<std::string> logistic = {"r", "C0", "K", "sigma"};
  static const std::vector<std::string> sir = {"beta", "gamma", "sigma"};
  switch (f) {
    case Family::UnivariateNormal: return univ;
    case Family::MultivariateNormal2d: return mvn;
    case Family::Linear:
    case Family::Exponential: return growth;
    case Family::Logistic: return logistic;
    case Family::Sir: return sir;
  }
  throw DomainError("unknown family");
}

/// Observable output names of a family, canonical order.
inline const std::vector<std::string>& family_species(Family f) {
  static const std::vector<std::string> univ = {"x"};
  static const std::vector<std::string> mvn = {"x", "y"};
  static const std::vector<std::string> growth = {"C"};
  static const std::vector<std::string> sir = {"S", "I", "R"};
  switch (f) {
    case Family::UnivariateNormal: return univ;
    case Family::MultivariateNormal2d: return mvn;
    case Family::Linear:
    case Family::Exponential:
    case Family::Logistic: return growth;
    case Family::Sir: return sir;
  }
  throw DomainError("unknown family");
}

/// Time unit carried as metadata only (never converted).
inline const char* family_time_unit(Family f) {
  switch (f) {
    case Family::Sir: return "days";
    case Family::Linear:
    case Family::Exponential:
    case Family::Logistic: return "years";
    default: return "";
  }
}

/// Open-interval bounds keeping optimizer iterates and finite-difference
/// probes inside the model domain. Rates and densities are positive;
/// normal means are unconstrained.
inline std::pair<double, double> parameter_bounds(const std::string& name) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (name == "sigma") return {1e-6, inf};
  if (name == "r" || name == "a" || name == "beta" || name == "gamma")
    return {1e-6, 1e3};
  if (name == "C0" || name == "K") return {1e-6, 1e4};
  if (name == "mu" || name == "mu1" || name == "mu2") return {-inf, inf};
  throw DomainError("unknown parameter '" + name + "'");
}

/// Ordered vector of named inferred parameters.
struct ParameterPoint {
  std::vector<std::string> names;
  std::vector<double> values;

  double get(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values[i];
    throw DomainError("parameter '" + name + "' not present");
  }

  bool has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
  }

  void validate() const {
    if (names.size() != values.size())
      throw DomainError("parameter point: names/values length mismatch");
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j)
        if (names[i] == names[j])
          throw DomainError("parameter point: duplicate name '" + names[i] + "'");
  }
};

/// A model family plus its fixed (known) parameters. `inferred` lists the
/// parameters under estimation; this toolkit works on two-dimensional
/// manifolds, so exactly two.
struct ModelSpec {
  Family family = Family::UnivariateNormal;
  std::map<std::string, double> fixed;
  std::vector<std::string> inferred;
  std::vector<std::string> species;
  std::map<std::string, double> initial_conditions;

  void validate() const {
    const auto& all = family_parameters(family);
    if (inferred.size() != 2)
      throw DomainError("model spec: exactly two inferred parameters are supported");
    for (const auto& n : inferred) {
      if (std::find(all.begin(), all.end(), n) == all.end())
        throw DomainError("model spec: '" + n + "' is not a parameter of " +
                          family_to_string(family));
      if (fixed.count(n))
        throw DomainError("model spec: '" + n + "' is both fixed and inferred");
    }
    for (const auto& [n, v] : fixed) {
      (void)v;
      if (std::find(all.begin(), all.end(), n) == all.end())
        throw DomainError("model spec: fixed parameter '" + n +
                          "' is not a parameter of " + family_to_string(family));
    }
    for (const auto& n : all)
      if (!fixed.count(n) &&
          std::find(inferred.begin(), inferred.end(), n) == inferred.end())
        throw DomainError("model spec: parameter '" + n + "' neither fixed nor inferred");
    if (species.empty()) throw DomainError("model spec: empty species list");
    const auto& obs = family_species(family);
    for (const auto& s : species)
      if (std::find(obs.begin(), obs.end(), s) == obs.end())
        throw DomainError("model spec: unknown species '" + s + "'");
    if (family == Family::Sir) {
      for (const char* k : {"S0", "I0", "R0"})
        if (!initial_conditions.count(k))
          throw DomainError(std::string("model spec: sir requires initial condition '") +
                            k + "'");
    }
  }

  bool sigma_inferred() const {
    return std::find(inferred.begin(), inferred.end(), "sigma") != inferred.end();
  }

  double sigma_of(const ParameterPoint& theta) const {
    return sigma_inferred() ? theta.get("sigma") : fixed.at("sigma");
  }

  /// Fixed values overlaid with the inferred point: the full parameter map.
  std::map<std::string, double> full_parameters(const ParameterPoint& theta) const {
    std::map<std::string, double> p = fixed;
    for (std::size_t i = 0; i < theta.names.size(); ++i)
      p[theta.names[i]] = theta.values[i];
    return p;
  }
};

/// Expected outputs at the requested times plus the constant observation
/// standard deviation. The model's expected behaviour never depends on
/// sigma.
struct ModelOutput {
  std::vector<double> times;
  Matrix means;  // L x M, time-major rows
  double sigma = 0.0;
};

inline void check_bounds(const ModelSpec& spec, const ParameterPoint& theta) {
  theta.validate();
  if (theta.names.size() != spec.inferred.size())
    throw DomainError("theta does not match the spec's inferred parameters");
  for (std::size_t i = 0; i < theta.names.size(); ++i) {
    if (theta.names[i] != spec.inferred[i])
      throw DomainError("theta order differs from the spec's inferred parameters");
    const auto [lo, hi] = parameter_bounds(theta.names[i]);
    if (!(theta.values[i] > lo) || !(theta.values[i] < hi))
      throw DomainError("parameter '" + theta.names[i] + "' = " +
                        std::to_string(theta.values[i]) + " violates bound (" +
                        std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
}

/// SIR vector field on population proportions: (-bSI, bSI - gI, gI).
/// The component sum is exactly zero by construction.
inline std::array<double, 3> sir_rhs(const std::array<double, 3>& state, double beta,
                                     double gamma) {
  const double infection = beta * state[0] * state[1];
  const double removal = gamma * state[1];
  return {-infection, infection - removal, removal};
}

namespace detail {

// Fixed DP5 step length for SIR forward solves. A fixed grid keeps the
// numerical solution a smooth function of (beta, gamma), which the
// finite-difference Jacobian and metric-derivative layers require.
inline constexpr double kSirStep = 0.05;

inline double closed_form_mean(Family f, const std::map<std::string, double>& p,
                               const std::string& species, double t) {
  switch (f) {
    case Family::UnivariateNormal:
      return p.at("mu");
    case Family::MultivariateNormal2d:
      return species == "x" ? p.at("mu1") : p.at("mu2");
    case Family::Linear:
      return p.at("a") * t + p.at("C0");
    case Family::Exponential:
      return p.at("C0") * std::exp(p.at("a") * t);
    case Family::Logistic: {
      const double r = p.at("r"), c0 = p.at("C0"), k = p.at("K");
      return c0 * k / (c0 + (k - c0) * std::exp(-r * t));
    }
    default:
      throw DomainError("no closed-form mean for this family");
  }
}

// SIR trajectory sampled at exactly the requested times (step hitting).
inline std::vector<std::array<double, 3>> sir_states_at(
    const std::map<std::string, double>& p,
    const std::map<std::string, double>& ics, const std::vector<double>& times) {
  const double beta = p.at("beta"), gamma = p.at("gamma");
  std::array<double, 3> state = {ics.at("S0"), ics.at("I0"), ics.at("R0")};
  std::vector<std::array<double, 3>> out;
  double t = 0.0;
  auto rhs = [beta, gamma](double, const std::vector<double>& y) {
    const auto d = sir_rhs({y[0], y[1], y[2]}, beta, gamma);
    return std::vector<double>{d[0], d[1], d[2]};
  };
  for (double target : times) {
    if (target > t) {
      const int n = std::max(1, static_cast<int>(std::ceil((target - t) / kSirStep)));
      IvpProblem prob;
      prob.rhs = rhs;
      prob.y0 = {state[0], state[1], state[2]};
      prob.t_start = t;
      prob.t_end = target;
      const Trajectory tr = integrate_dp5_fixed(prob, (target - t) / n);
      state = {tr.ys.back()[0], tr.ys.back()[1], tr.ys.back()[2]};
      t = target;
    }
    out.push_back(state);
  }
  return out;
}

}  // namespace detail

/// Expected values of the observed species at the requested times.
/// Closed-form families evaluate analytically; sir integrates its ODEs.
inline ModelOutput solve_forward(const ModelSpec& spec, const ParameterPoint& theta,
                                 const std::vector<double>& times) {
  if (times.empty()) throw DomainError("solve_forward: empty time vector");
  if (times.front() < 0) throw DomainError("solve_forward: times must be non-negative");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1]))
      throw DomainError("solve_forward: times must be strictly increasing");
  check_bounds(spec, theta);

  const auto p = spec.full_parameters(theta);
  const std::size_t m = spec.species.size();
  ModelOutput out;
  out.times = times;
  out.means = Matrix(times.size(), m);
  out.sigma = spec.sigma_of(theta);

  if (spec.family == Family::Sir) {
    const auto states = detail::sir_states_at(p, spec.initial_conditions, times);
    const auto& canon = family_species(Family::Sir);
    for (std::size_t j = 0; j < times.size(); ++j)
      for (std::size_t s = 0; s < m; ++s) {
        const auto it = std::find(canon.begin(), canon.end(), spec.species[s]);
        out.means(j, s) = states[j][static_cast<std::size_t>(it - canon.begin())];
      }
  } else {
    for (std::size_t j = 0; j < times.size(); ++j)
      for (std::size_t s = 0; s < m; ++s)
        out.means(j, s) = detail::closed_form_mean(spec.family, p, spec.species[s],
                                                   times[j]);
  }
  return out;
}

/// Expected value(s) of the observed species at a single time.
inline std::vector<double> mean(const ModelSpec& spec, const ParameterPoint& theta,
                                double t) {
  if (t < 0) throw DomainError("mean: t must be non-negative");
  const ModelOutput out = solve_forward(spec, theta, {t});
  std::vector<double> v(spec.species.size());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = out.means(0, s);
  return v;
}

namespace detail {

// Analytic partial of the mean with respect to one model parameter.
// Logistic partials use the exp(-rt) form, stable for large rt.
inline double mean_partial(Family f, const std::map<std::string, double>& p,
                           const std::string& species, const std::string& wrt,
                           double t) {
  switch (f) {
    case Family::UnivariateNormal:
      return wrt == "mu" ? 1.0 : 0.0;
    case Family::MultivariateNormal2d:
      if (species == "x") return wrt == "mu1" ? 1.0 : 0.0;
      return wrt == "mu2" ? 1.0 : 0.0;
    case Family::Linear:
      if (wrt == "a") return t;
      if (wrt == "C0") return 1.0;
      return 0.0;
    case Family::Exponential: {
      const double a = p.at("a"), c0 = p.at("C0");
      if (wrt == "a") return t * c0 * std::exp(a * t);
      if (wrt == "C0") return std::exp(a * t);
      return 0.0;
    }
    case Family::Logistic: {
      const double r = p.at("r"), c0 = p.at("C0"), k = p.at("K");
      const double emrt = std::exp(-r * t);
      const double denom = (k - c0) * emrt + c0;
      if (wrt == "r") return c0 * k * t * (k - c0) * emrt / (denom * denom);
      // Remaining partials rewritten with exp(-rt): multiply the textbook
      // exp(rt) forms through by exp(-2rt).
      const double d2 = c0 * (1.0 - emrt) + k * emrt;
      if (wrt == "C0") return k * k * emrt / (d2 * d2);
      if (wrt == "K") return c0 * c0 * (1.0 - emrt) / (d2 * d2);
      return 0.0;
    }
    default:
      throw DomainError("no analytic partial for this family");
  }
}

}  // namespace detail

/// Model Jacobian: rows are the mean outputs ordered time-major then
/// species, one row per (time, species); when sigma is inferred a single
/// final row carries its partials (1 in sigma's column, 0 elsewhere).
/// Columns follow spec.inferred. Analytic for the closed-form families;
/// central finite differences of the ODE solution for sir (relative step
/// 1e-5, absolute floor 1e-8).
inline Matrix model_jacobian(const ModelSpec& spec, const ParameterPoint& theta,
                             const std::vector<double>& times) {
  if (times.empty()) throw DomainError("model_jacobian: empty time vector");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1]))
      throw DomainError("model_jacobian: times must be strictly increasing");
  check_bounds(spec, theta);

  const std::size_t nu = spec.inferred.size();
  const std::size_t m = spec.species.size();
  const std::size_t mean_rows = times.size() * m;
  const bool sig_inf = spec.sigma_inferred();
  Matrix jac(mean_rows + (sig_inf ? 1 : 0), nu);

  if (spec.family == Family::Sir) {
    for (std::size_t col = 0; col < nu; ++col) {
      if (spec.inferred[col] == "sigma") continue;  // mean is sigma-free
      const double v = theta.values[col];
      const double delta = std::max(1e-5 * std::abs(v), 1e-8);
      ParameterPoint up = theta, dn = theta;
      up.values[col] = v + delta;
      dn.values[col] = v - delta;
      const ModelOutput hi = solve_forward(spec, up, times);
      const ModelOutput lo = solve_forward(spec, dn, times);
      for (std::size_t j = 0; j < times.size(); ++j)
        for (std::size_t s = 0; s < m; ++s)
          jac(j * m + s, col) = (hi.means(j, s) - lo.means(j, s)) / (2.0 * delta);
    }
  } else {
    const auto p = spec.full_parameters(theta);
    for (std::size_t j = 0; j < times.size(); ++j)
      for (std::size_t s = 0; s < m; ++s)
        for (std::size_t col = 0; col < nu; ++col)
          jac(j * m + s, col) = detail::mean_partial(spec.family, p, spec.species[s],
                                                     spec.inferred[col], times[j]);
  }

  if (sig_inf) {
    for (std::size_t col = 0; col < nu; ++col)
      jac(mean_rows, col) = spec.inferred[col] == "sigma" ? 1.0 : 0.0;
  }
  return jac;
}

}  // namespace infogeo

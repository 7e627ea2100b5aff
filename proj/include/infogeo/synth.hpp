#pragma once

#include <cstdint>
#include <vector>

#include "infogeo/common.hpp"
#include "infogeo/likelihood.hpp"
#include "infogeo/models.hpp"
#include "infogeo/rng.hpp"

namespace infogeo {

/// Seeded synthetic-data recipe: normal observations about the model
/// means at the true parameter values.
struct SynthConfig {
  ModelSpec spec;
  ParameterPoint theta_true;  // full parameter set, sigma included
  std::vector<double> times;
  std::vector<int> counts;
  std::uint64_t seed = 0;
};

/// Draws x ~ Normal(mu_m(theta_true, t_j), sigma^2), one variate per
/// (time j, species m, replicate i), keyed by (seed, j, m, i). Output is
/// reproducible and independent of generation order; negative draws are
/// kept as-is. sigma = 0 is allowed and yields the means exactly.
inline Dataset generate(const SynthConfig& config) {
  config.spec.validate();
  config.theta_true.validate();
  if (config.times.empty()) throw DomainError("synth: empty time vector");
  if (config.counts.size() != config.times.size())
    throw DomainError("synth: counts/times length mismatch");
  for (int n : config.counts)
    if (n < 1) throw DomainError("synth: counts must be >= 1");

  const auto& all = family_parameters(config.spec.family);
  for (const auto& name : all) {
    if (!config.theta_true.has(name))
      throw DomainError("synth: theta_true is missing '" + name + "'");
    const double v = config.theta_true.get(name);
    const auto [lo, hi] = parameter_bounds(name);
    // sigma = 0 is the degenerate noise-free case, explicitly permitted.
    if (name == "sigma" && v == 0.0) continue;
    if (!(v > lo) || !(v < hi))
      throw DomainError("synth: theta_true '" + name + "' violates bound");
  }

  ParameterPoint inferred;
  inferred.names = config.spec.inferred;
  for (const auto& n : inferred.names) inferred.values.push_back(config.theta_true.get(n));
  const double sigma = config.theta_true.get("sigma");

  // Means need in-bounds sigma for solve_forward's checks only when
  // sigma is inferred; substitute a positive placeholder in the
  // degenerate case (means never depend on sigma).
  ParameterPoint mean_point = inferred;
  if (config.spec.sigma_inferred() && sigma == 0.0) {
    for (std::size_t i = 0; i < mean_point.names.size(); ++i)
      if (mean_point.names[i] == "sigma") mean_point.values[i] = 1.0;
  }
  const ModelOutput out = solve_forward(config.spec, mean_point, config.times);

  Dataset data;
  data.times = config.times;
  data.species = config.spec.species;
  data.counts = config.counts;
  const std::size_t m = config.spec.species.size();
  for (std::size_t j = 0; j < config.times.size(); ++j) {
    Matrix block(static_cast<std::size_t>(config.counts[j]), m);
    for (std::size_t i = 0; i < block.rows(); ++i)
      for (std::size_t s = 0; s < m; ++s)
        block(i, s) = out.means(j, s) +
                      sigma * rng::keyed_standard_normal(config.seed, j, s, i);
    data.observations.push_back(std::move(block));
  }
  data.validate();
  return data;
}

}  // namespace infogeo

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "infogeo/common.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/gridscan.hpp"
#include "infogeo/io.hpp"
#include "infogeo/likelihood.hpp"
#include "infogeo/models.hpp"
#include "infogeo/synth.hpp"

namespace infogeo {

/// One experiment: model + true parameters + data design + analysis
/// settings. Mirrors the JSON config format (docs/config-schema.json).
struct ExperimentConfig {
  ModelSpec spec;
  std::map<std::string, double> truth;
  std::vector<double> times;
  std::vector<int> counts;
  std::uint64_t seed = 1;
  double alpha = 0.95;
  std::map<std::string, std::array<double, 2>> box;  // keyed by inferred name
  int resolution = 100;
  int geodesic_count = 20;
  int multi_start = 0;
  std::string output_dir;

  Design design() const { return Design{times, counts, spec.species}; }

  SynthConfig synth() const {
    SynthConfig s;
    s.spec = spec;
    for (const auto& [k, v] : truth) {
      s.theta_true.names.push_back(k);
      s.theta_true.values.push_back(v);
    }
    s.times = times;
    s.counts = counts;
    s.seed = seed;
    return s;
  }

  ParameterPoint truth_point() const {
    ParameterPoint p;
    p.names = spec.inferred;
    for (const auto& n : spec.inferred) p.values.push_back(truth.at(n));
    return p;
  }

  Box grid_box() const {
    Box b;
    for (const auto& n : spec.inferred) {
      const auto& lim = box.at(n);
      b.lo.push_back(lim[0]);
      b.hi.push_back(lim[1]);
    }
    return b;
  }

  AxisSpec axis(int which, int res_override = 0) const {
    const std::string& name = spec.inferred[static_cast<std::size_t>(which)];
    const auto& lim = box.at(name);
    return AxisSpec{name, lim[0], lim[1], res_override > 0 ? res_override : resolution};
  }
};

namespace detail {

template <typename T>
T require(const nlohmann::json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

template <typename T>
T optional(const nlohmann::json& j, const std::string& path, const std::string& key,
           T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig cfg;

  if (!doc.contains("model")) throw ConfigError("model: missing");
  const auto& model = doc.at("model");
  try {
    cfg.spec.family = family_from_string(
        detail::require<std::string>(model, "model", "family"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model.family: ") + e.what());
  }
  cfg.spec.fixed =
      detail::optional<std::map<std::string, double>>(model, "model", "fixed", {});
  cfg.spec.inferred =
      detail::require<std::vector<std::string>>(model, "model", "inferred");
  cfg.spec.species = detail::optional<std::vector<std::string>>(
      model, "model", "species", family_species(cfg.spec.family));
  cfg.spec.initial_conditions = detail::optional<std::map<std::string, double>>(
      model, "model", "initial_conditions", {});
  try {
    cfg.spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  cfg.truth = detail::require<std::map<std::string, double>>(doc, "", "truth");
  for (const auto& name : family_parameters(cfg.spec.family))
    if (!cfg.truth.count(name)) throw ConfigError("truth." + name + ": missing");
  for (const auto& [name, value] : cfg.spec.fixed)
    if (cfg.truth.count(name) && cfg.truth.at(name) != value)
      throw ConfigError("truth." + name + ": disagrees with model.fixed." + name);

  if (!doc.contains("design")) throw ConfigError("design: missing");
  const auto& design = doc.at("design");
  cfg.times = detail::require<std::vector<double>>(design, "design", "times");
  if (cfg.times.empty()) throw ConfigError("design.times: must be non-empty");
  for (std::size_t j = 0; j + 1 < cfg.times.size(); ++j)
    if (!(cfg.times[j + 1] > cfg.times[j]))
      throw ConfigError("design.times: must be strictly increasing");
  if (cfg.times.front() < 0) throw ConfigError("design.times: must be non-negative");
  if (design.contains("counts") && design.at("counts").is_array()) {
    cfg.counts = detail::require<std::vector<int>>(design, "design", "counts");
  } else {
    const int n = detail::require<int>(design, "design", "counts");
    cfg.counts.assign(cfg.times.size(), n);
  }
  if (cfg.counts.size() != cfg.times.size())
    throw ConfigError("design.counts: length must match design.times");
  for (int n : cfg.counts)
    if (n < 1) throw ConfigError("design.counts: entries must be >= 1");
  cfg.seed = detail::optional<std::uint64_t>(design, "design", "seed", 1);

  if (!doc.contains("analysis")) throw ConfigError("analysis: missing");
  const auto& analysis = doc.at("analysis");
  cfg.alpha = detail::optional<double>(analysis, "analysis", "alpha", 0.95);
  if (!(cfg.alpha > 0 && cfg.alpha < 1))
    throw ConfigError("analysis.alpha: must lie in (0, 1)");
  const auto rawbox = detail::require<std::map<std::string, std::vector<double>>>(
      analysis, "analysis", "box");
  for (const auto& name : cfg.spec.inferred) {
    const auto it = rawbox.find(name);
    if (it == rawbox.end()) throw ConfigError("analysis.box." + name + ": missing");
    if (it->second.size() != 2)
      throw ConfigError("analysis.box." + name + ": expected [lo, hi]");
    const double lo = it->second[0], hi = it->second[1];
    if (!(hi > lo)) throw ConfigError("analysis.box." + name + ": needs hi > lo");
    const auto [blo, bhi] = parameter_bounds(name);
    if (lo < blo || hi > bhi)
      throw ConfigError("analysis.box." + name + ": outside the parameter bounds");
    cfg.box[name] = {lo, hi};
  }
  cfg.resolution = detail::optional<int>(analysis, "analysis", "resolution", 100);
  if (cfg.resolution < 2) throw ConfigError("analysis.resolution: must be >= 2");
  cfg.geodesic_count = detail::optional<int>(analysis, "analysis", "geodesic_count", 20);
  if (cfg.geodesic_count < 1)
    throw ConfigError("analysis.geodesic_count: must be >= 1");
  cfg.multi_start = detail::optional<int>(analysis, "analysis", "multi_start", 0);
  if (cfg.multi_start < 0) throw ConfigError("analysis.multi_start: must be >= 0");
  cfg.output_dir = detail::optional<std::string>(analysis, "analysis", "output_dir", "");

  // Truth must respect the bounds (sigma = 0 permitted for degenerate data).
  for (const auto& [name, value] : cfg.truth) {
    const auto [lo, hi] = parameter_bounds(name);
    if (name == "sigma" && value == 0.0) continue;
    if (!(value > lo) || !(value < hi))
      throw ConfigError("truth." + name + ": violates parameter bounds");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(doc);
}

}  // namespace infogeo

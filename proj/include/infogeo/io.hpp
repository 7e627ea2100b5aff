#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "infogeo/common.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/gridscan.hpp"
#include "infogeo/likelihood.hpp"
#include "infogeo/synth.hpp"

namespace infogeo {

/// Full-precision, locale-independent double formatting ("." decimal).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes content to path via a temporary file and rename, so failures
/// never leave partial output behind.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out) throw DomainError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dataset_to_csv(const Dataset& data) {
  std::string out = "time,species,replicate,value\n";
  for (std::size_t j = 0; j < data.times.size(); ++j)
    for (std::size_t s = 0; s < data.species.size(); ++s)
      for (std::size_t i = 0; i < data.observations[j].rows(); ++i) {
        out += format_double(data.times[j]);
        out += ',';
        out += data.species[s];
        out += ',';
        out += std::to_string(i);
        out += ',';
        out += format_double(data.observations[j](i, s));
        out += '\n';
      }
  return out;
}

inline Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("dataset csv: empty file");
  if (line != "time,species,replicate,value")
    throw DomainError("dataset csv: unexpected header '" + line + "'");
  std::vector<double> times;
  std::vector<std::string> species;
  // values[time index][species index] -> replicate-ordered list
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t_s, sp, rep_s, val_s;
    if (!std::getline(row, t_s, ',') || !std::getline(row, sp, ',') ||
        !std::getline(row, rep_s, ',') || !std::getline(row, val_s, ','))
      throw DomainError("dataset csv: malformed row '" + line + "'");
    const double t = std::stod(t_s);
    const double v = std::stod(val_s);
    std::size_t ti = times.size();
    for (std::size_t k = 0; k < times.size(); ++k)
      if (times[k] == t) { ti = k; break; }
    if (ti == times.size()) times.push_back(t);
    std::size_t si = species.size();
    for (std::size_t k = 0; k < species.size(); ++k)
      if (species[k] == sp) { si = k; break; }
    if (si == species.size()) species.push_back(sp);
    cells[{ti, si}].push_back(v);
  }
  if (times.empty()) throw DomainError("dataset csv: no data rows");

  Dataset data;
  data.times = times;
  data.species = species;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const std::size_t n = cells.at({j, 0}).size();
    for (std::size_t s = 0; s < species.size(); ++s)
      if (cells.at({j, s}).size() != n)
        throw DomainError("dataset csv: replicate counts differ across species");
    Matrix block(n, species.size());
    for (std::size_t s = 0; s < species.size(); ++s)
      for (std::size_t i = 0; i < n; ++i) block(i, s) = cells.at({j, s})[i];
    data.counts.push_back(static_cast<int>(n));
    data.observations.push_back(std::move(block));
  }
  data.validate();
  return data;
}

inline std::string grid_to_csv(const ScalarGrid& grid) {
  std::string out = "theta1,theta2,value\n";
  for (int i = 0; i < grid.axis1.resolution; ++i)
    for (int j = 0; j < grid.axis2.resolution; ++j) {
      out += format_double(axis_point(grid.axis1, i));
      out += ',';
      out += format_double(axis_point(grid.axis2, j));
      out += ',';
      out += format_double(grid.values(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j)));
      out += '\n';
    }
  return out;
}

inline std::string grid_failures_to_json(const ScalarGrid& grid) {
  nlohmann::json doc;
  doc["axis1"] = grid.axis1.name;
  doc["axis2"] = grid.axis2.name;
  doc["failures"] = nlohmann::json::array();
  for (const auto& f : grid.failures) {
    nlohmann::json item;
    item["i"] = f.i;
    item["j"] = f.j;
    item["theta1"] = axis_point(grid.axis1, f.i);
    item["theta2"] = axis_point(grid.axis2, f.j);
    item["reason"] = f.reason;
    doc["failures"].push_back(item);
  }
  return doc.dump(2) + "\n";
}

/// Rebuilds a grid from its CSV form (row-major, theta1 outer). Failed
/// cells come back as the NaN they were written as; the failure reasons
/// live in the sidecar JSON and are not reloaded.
inline ScalarGrid grid_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "theta1,theta2,value")
    throw DomainError("grid csv: unexpected header");
  std::vector<double> t1s, t2s, vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
        !std::getline(row, c, ','))
      throw DomainError("grid csv: malformed row '" + line + "'");
    t1s.push_back(std::stod(a));
    t2s.push_back(std::stod(b));
    vals.push_back(std::stod(c));
  }
  if (vals.empty()) throw DomainError("grid csv: no data rows");
  std::size_t res2 = 1;
  while (res2 < t1s.size() && t1s[res2] == t1s[0]) ++res2;
  if (t1s.size() % res2 != 0) throw DomainError("grid csv: ragged grid");
  const std::size_t res1 = t1s.size() / res2;
  if (res1 < 2 || res2 < 2) throw DomainError("grid csv: resolution must be >= 2");
  ScalarGrid grid;
  grid.axis1 = AxisSpec{"theta1", t1s.front(), t1s.back(), static_cast<int>(res1)};
  grid.axis2 = AxisSpec{"theta2", t2s.front(), t2s[res2 - 1], static_cast<int>(res2)};
  grid.values = Matrix(res1, res2);
  for (std::size_t i = 0; i < res1; ++i)
    for (std::size_t j = 0; j < res2; ++j) grid.values(i, j) = vals[i * res2 + j];
  return grid;
}

inline std::string contour_to_csv(const ContourPolyline& contour) {
  std::string out = "theta1,theta2\n";
  for (std::size_t i = 0; i < contour.points.rows(); ++i) {
    out += format_double(contour.points(i, 0));
    out += ',';
    out += format_double(contour.points(i, 1));
    out += '\n';
  }
  return out;
}

inline std::string geodesics_to_csv(const std::vector<GeodesicCurve>& curves) {
  std::string out = "curve_id,t,theta1,theta2\n";
  for (std::size_t c = 0; c < curves.size(); ++c)
    for (std::size_t i = 0; i < curves[c].ts.size(); ++i) {
      out += std::to_string(c);
      out += ',';
      out += format_double(curves[c].ts[i]);
      out += ',';
      out += format_double(curves[c].params(i, 0));
      out += ',';
      out += format_double(curves[c].params(i, 1));
      out += '\n';
    }
  return out;
}

inline std::string mle_to_json(const MleResult& res) {
  nlohmann::json doc;
  doc["converged"] = res.converged;
  doc["iterations"] = res.iterations;
  doc["loglik"] = res.loglik_at_mle;
  doc["theta_hat"]["names"] = res.theta_hat.names;
  doc["theta_hat"]["values"] = res.theta_hat.values;
  doc["warnings"] = res.warnings;
  return doc.dump(2) + "\n";
}

inline MleResult mle_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  MleResult res;
  res.converged = doc.at("converged").get<bool>();
  res.iterations = doc.at("iterations").get<long>();
  res.loglik_at_mle = doc.at("loglik").get<double>();
  res.theta_hat.names = doc.at("theta_hat").at("names").get<std::vector<std::string>>();
  res.theta_hat.values = doc.at("theta_hat").at("values").get<std::vector<double>>();
  if (doc.contains("warnings"))
    res.warnings = doc.at("warnings").get<std::vector<std::string>>();
  return res;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace infogeo

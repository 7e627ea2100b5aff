#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infogeo/common.hpp"
#include "infogeo/config.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/gridscan.hpp"
#include "infogeo/io.hpp"
#include "infogeo/likelihood.hpp"
#include "infogeo/svg.hpp"
#include "infogeo/synth.hpp"

namespace infogeo {

/// Fit entry shared by the commands that need an MLE: starts from the
/// config's true parameter values (synthetic studies always carry them)
/// and searches within the per-parameter bounds.
inline MleResult fit_config(const ExperimentConfig& cfg, const Dataset& data) {
  MleOptions opt;
  opt.multi_start = cfg.multi_start;
  Box box = family_box(cfg.spec);
  if (cfg.multi_start > 0) box = cfg.grid_box();  // LHS starts need a finite box
  return mle(cfg.spec, data, cfg.truth_point(), box, opt);
}

inline void cmd_simulate(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed_override = {}) {
  std::filesystem::create_directories(out_dir);
  SynthConfig sc = cfg.synth();
  if (seed_override) sc.seed = *seed_override;
  const Dataset data = generate(sc);
  atomic_write(out_dir / "data.csv", dataset_to_csv(data));
}

inline void cmd_fit(const ExperimentConfig& cfg, const std::filesystem::path& data_path,
                    const std::filesystem::path& out_dir) {
  const Dataset data = dataset_from_csv(read_file(data_path));
  const MleResult res = fit_config(cfg, data);
  std::filesystem::create_directories(out_dir);
  atomic_write(out_dir / "mle.json", mle_to_json(res));
}

inline void cmd_region(const ExperimentConfig& cfg,
                       const std::filesystem::path& data_path,
                       const std::filesystem::path& out_dir) {
  const Dataset data = dataset_from_csv(read_file(data_path));
  const MleResult res = fit_config(cfg, data);
  const ContourPolyline contour =
      trace_confidence_contour(cfg.spec, data, res, cfg.alpha, cfg.grid_box());

  nlohmann::json summary;
  summary["alpha"] = cfg.alpha;
  summary["delta"] = chi_squared_quantile(2, cfg.alpha);
  summary["threshold"] = confidence_threshold(2, cfg.alpha);
  summary["closed"] = contour.closed;
  summary["open_region"] = contour.open_region || !contour.closed;
  summary["reason"] = contour.reason;
  summary["n_points"] = contour.points.rows();

  std::filesystem::create_directories(out_dir);
  atomic_write(out_dir / "region.csv", contour_to_csv(contour));
  atomic_write(out_dir / "summary.json", summary.dump(2) + "\n");
}

/// Equiangular fan of unit-speed geodesics from the MLE, each with arc
/// length sqrt(Delta_{2,alpha}).
inline std::vector<GeodesicCurve> geodesic_fan(const ExperimentConfig& cfg,
                                               const MleResult& res) {
  const MetricField metric = fisher_metric_field(cfg.spec, cfg.design());
  const double target = std::sqrt(chi_squared_quantile(2, cfg.alpha));
  std::vector<GeodesicCurve> fan;
  for (int k = 0; k < cfg.geodesic_count; ++k) {
    const double angle = 2.0 * 3.14159265358979323846 * k / cfg.geodesic_count;
    fan.push_back(geodesic_shoot(metric, res.theta_hat.values, angle, target));
  }
  return fan;
}

inline void cmd_geodesics(const ExperimentConfig& cfg,
                          const std::filesystem::path& data_path,
                          const std::filesystem::path& out_dir) {
  const Dataset data = dataset_from_csv(read_file(data_path));
  const MleResult res = fit_config(cfg, data);
  const std::vector<GeodesicCurve> fan = geodesic_fan(cfg, res);
  std::filesystem::create_directories(out_dir);
  atomic_write(out_dir / "geodesics.csv", geodesics_to_csv(fan));
}

inline void cmd_curvature(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir,
                          int resolution_override = 0) {
  const MetricField metric = fisher_metric_field(cfg.spec, cfg.design());
  const ScalarGrid grid = curvature_grid(metric, cfg.axis(0, resolution_override),
                                         cfg.axis(1, resolution_override));
  std::filesystem::create_directories(out_dir);
  atomic_write(out_dir / "curvature.csv", grid_to_csv(grid));
  atomic_write(out_dir / "curvature_failures.json", grid_failures_to_json(grid));
}

inline void cmd_loglik(const ExperimentConfig& cfg,
                       const std::filesystem::path& data_path,
                       const std::filesystem::path& out_dir,
                       int resolution_override = 0) {
  const Dataset data = dataset_from_csv(read_file(data_path));
  const MleResult res = fit_config(cfg, data);
  const ScalarGrid grid = loglik_grid(cfg.spec, data, res,
                                      cfg.axis(0, resolution_override),
                                      cfg.axis(1, resolution_override));
  std::filesystem::create_directories(out_dir);
  atomic_write(out_dir / "loglik.csv", grid_to_csv(grid));
  atomic_write(out_dir / "loglik_failures.json", grid_failures_to_json(grid));
}

inline void cmd_render(const ExperimentConfig& cfg,
                       const std::filesystem::path& grid_csv,
                       const std::optional<std::filesystem::path>& region_csv,
                       const std::optional<std::filesystem::path>& geodesics_csv,
                       const std::optional<std::filesystem::path>& mle_json,
                       const std::filesystem::path& out_dir) {
  ScalarGrid grid = grid_from_csv(read_file(grid_csv));
  grid.axis1.name = cfg.spec.inferred[0];
  grid.axis2.name = cfg.spec.inferred[1];

  std::vector<Matrix> polylines;
  std::vector<std::string> colors;
  if (region_csv) {
    const std::string text = read_file(*region_csv);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::array<double, 2>> pts;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string a, b;
      std::getline(row, a, ',');
      std::getline(row, b, ',');
      pts.push_back({std::stod(a), std::stod(b)});
    }
    Matrix m(pts.size(), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      m(i, 0) = pts[i][0];
      m(i, 1) = pts[i][1];
    }
    polylines.push_back(std::move(m));
    colors.push_back("magenta");
  }
  if (geodesics_csv) {
    const std::string text = read_file(*geodesics_csv);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::map<long, std::vector<std::array<double, 2>>> curves;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string id, t, a, b;
      std::getline(row, id, ',');
      std::getline(row, t, ',');
      std::getline(row, a, ',');
      std::getline(row, b, ',');
      curves[std::stol(id)].push_back({std::stod(a), std::stod(b)});
    }
    for (const auto& [id, pts] : curves) {
      (void)id;
      Matrix m(pts.size(), 2);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        m(i, 0) = pts[i][0];
        m(i, 1) = pts[i][1];
      }
      polylines.push_back(std::move(m));
      colors.push_back("black");
    }
  }

  std::vector<FigureMarker> markers;
  const ParameterPoint truth = cfg.truth_point();
  markers.push_back({truth.values[0], truth.values[1], "green"});
  if (mle_json) {
    const MleResult res = mle_from_json(read_file(*mle_json));
    markers.push_back({res.theta_hat.values[0], res.theta_hat.values[1], "red"});
  }

  std::filesystem::create_directories(out_dir);
  atomic_write(out_dir / "figure.svg", render_svg(grid, polylines, colors, markers));
}

}  // namespace infogeo

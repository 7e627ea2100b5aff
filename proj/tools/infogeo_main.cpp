// infogeo command line: config-driven experiment runner.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "infogeo/infogeo.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Likelihood inference and information geometry over ODE models"};
  app.set_version_flag("--version", std::string("infogeo ") + infogeo::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::string grid_path, region_path, geodesics_path, mle_path;
  std::optional<std::uint64_t> seed;
  int resolution = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory (default: analysis.output_dir or .)");
    if (needs_data)
      cmd->add_option("--data", data_path, "dataset CSV produced by simulate")->required();
  };

  CLI::App* simulate = app.add_subcommand("simulate", "generate synthetic data.csv");
  add_common(simulate, false);
  simulate->add_option("--seed", seed, "override design.seed");

  CLI::App* fit = app.add_subcommand("fit", "maximum-likelihood fit, writes mle.json");
  add_common(fit, true);

  CLI::App* region = app.add_subcommand(
      "region", "trace the Wilks confidence contour, writes region.csv + summary.json");
  add_common(region, true);

  CLI::App* geodesics = app.add_subcommand(
      "geodesics", "shoot the geodesic fan from the MLE, writes geodesics.csv");
  add_common(geodesics, true);

  CLI::App* curvature = app.add_subcommand(
      "curvature", "scalar curvature over the analysis box, writes curvature.csv");
  add_common(curvature, false);
  curvature->add_option("--resolution", resolution, "override analysis.resolution");

  CLI::App* loglik = app.add_subcommand(
      "loglik", "normalised log-likelihood grid, writes loglik.csv");
  add_common(loglik, true);
  loglik->add_option("--resolution", resolution, "override analysis.resolution");

  CLI::App* render = app.add_subcommand("render", "render a grid (+ overlays) to figure.svg");
  add_common(render, false);
  render->add_option("--grid", grid_path, "grid CSV (curvature.csv or loglik.csv)")
      ->required();
  render->add_option("--region", region_path, "region.csv overlay");
  render->add_option("--geodesics", geodesics_path, "geodesics.csv overlay");
  render->add_option("--mle", mle_path, "mle.json marker");

  CLI11_PARSE(app, argc, argv);

  try {
    const infogeo::ExperimentConfig cfg = infogeo::load_config(config_path);
    const fs::path out =
        !out_dir.empty() ? fs::path(out_dir)
                         : (!cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                                    : fs::path("."));
    if (simulate->parsed()) {
      infogeo::cmd_simulate(cfg, out, seed);
    } else if (fit->parsed()) {
      infogeo::cmd_fit(cfg, data_path, out);
    } else if (region->parsed()) {
      infogeo::cmd_region(cfg, data_path, out);
    } else if (geodesics->parsed()) {
      infogeo::cmd_geodesics(cfg, data_path, out);
    } else if (curvature->parsed()) {
      infogeo::cmd_curvature(cfg, out, resolution);
    } else if (loglik->parsed()) {
      infogeo::cmd_loglik(cfg, data_path, out, resolution);
    } else if (render->parsed()) {
      std::optional<fs::path> region_file, geodesics_file, mle_file;
      if (!region_path.empty()) region_file = region_path;
      if (!geodesics_path.empty()) geodesics_file = geodesics_path;
      if (!mle_path.empty()) mle_file = mle_path;
      infogeo::cmd_render(cfg, grid_path, region_file, geodesics_file, mle_file, out);
    }
  } catch (const infogeo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

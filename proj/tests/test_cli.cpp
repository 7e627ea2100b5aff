// End-to-end checks of the installed command line: exit codes, output
// files, and byte-level determinism of a full pipeline.
#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "infogeo/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = INFOGEO_CLI_PATH;
const fs::path kConfigDir = INFOGEO_CONFIG_DIR;

int run(const std::string& args) {
  const int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("infogeo_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Cli, SimulateFitPipeline) {
  TempDir dir("pipeline");
  const std::string cfg = (kConfigDir / "mvn-means.json").string();
  EXPECT_EQ(run("simulate --config " + cfg + " --out " + dir.path.string()), 0);
  EXPECT_TRUE(fs::exists(dir.path / "data.csv"));
  EXPECT_EQ(run("fit --config " + cfg + " --data " + (dir.path / "data.csv").string() +
                " --out " + dir.path.string()),
            0);
  EXPECT_TRUE(fs::exists(dir.path / "mle.json"));
  const auto mle = infogeo::mle_from_json(infogeo::read_file(dir.path / "mle.json"));
  EXPECT_TRUE(mle.converged);
  EXPECT_NEAR(mle.theta_hat.get("mu1"), 0.8, 0.5);
}

TEST(Cli, ConfigErrorsExitTwo) {
  TempDir dir("badcfg");
  const fs::path bad = dir.path / "bad.json";
  std::ofstream(bad) << R"({"model": {"family": "linear"}})";
  EXPECT_EQ(run("simulate --config " + bad.string() + " --out " + dir.path.string()), 2);
  EXPECT_FALSE(fs::exists(dir.path / "data.csv"));
  const fs::path missing = dir.path / "missing.json";
  EXPECT_EQ(run("simulate --config " + missing.string()), 2);
}

TEST(Cli, NumericalFailuresExitThree) {
  TempDir dir("baddata");
  const std::string cfg = (kConfigDir / "mvn-means.json").string();
  const fs::path garbled = dir.path / "data.csv";
  std::ofstream(garbled) << "time,species,replicate,value\nnot,a,valid,row\n";
  EXPECT_EQ(run("fit --config " + cfg + " --data " + garbled.string() + " --out " +
                dir.path.string()),
            3);
  EXPECT_FALSE(fs::exists(dir.path / "mle.json"));
}

TEST(Cli, RenderProducesSvg) {
  TempDir dir("render");
  const std::string cfg = (kConfigDir / "univariate-normal.json").string();
  ASSERT_EQ(run("curvature --config " + cfg + " --resolution 10 --out " +
                dir.path.string()),
            0);
  ASSERT_TRUE(fs::exists(dir.path / "curvature.csv"));
  EXPECT_EQ(run("render --config " + cfg + " --grid " +
                (dir.path / "curvature.csv").string() + " --out " + dir.path.string()),
            0);
  EXPECT_TRUE(fs::exists(dir.path / "figure.svg"));
  const std::string svg = infogeo::read_file(dir.path / "figure.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
}

TEST(Cli, PaperDesignsProduceThirtyRowDatasets) {
  // Logistic (3 times x 10 replicates) and SIR infected-only
  // (3 times x 10) each give 30 observation rows plus the header.
  for (const char* name : {"logistic-early-mid-late", "sir-infected-only"}) {
    TempDir dir(std::string("rows_") + name);
    const std::string cfg = (kConfigDir / (std::string(name) + ".json")).string();
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + dir.path.string()), 0);
    const std::string text = infogeo::read_file(dir.path / "data.csv");
    const long rows = std::count(text.begin(), text.end(), '\n');
    EXPECT_EQ(rows, 31) << name;  // header + 30 observations
  }
}

TEST(Cli, SeedOverrideChangesData) {
  TempDir dir("seeds");
  const std::string cfg = (kConfigDir / "mvn-means.json").string();
  ASSERT_EQ(run("simulate --config " + cfg + " --out " + (dir.path / "a").string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --seed 99 --out " +
                (dir.path / "b").string()),
            0);
  EXPECT_NE(infogeo::read_file(dir.path / "a" / "data.csv"),
            infogeo::read_file(dir.path / "b" / "data.csv"));
}

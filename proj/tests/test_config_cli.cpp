#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "eprtele/config.hpp"
#include "eprtele/io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace eprtele;

const std::string kCli = EPRTELE_CLI_PATH;
const std::string kConfigs = EPRTELE_CONFIG_DIR;

const char* kMinimal = R"({
  "grid": {"omega_min": 1000.0, "omega_max": 1032.0, "n_points": 32},
  "epr": {"omega1_center": 1016.0, "omega2_center": 1016.0, "mu": [-0.9, -0.99], "sigma": 1.5},
  "input": {"center": 1016.5, "width": 1.5},
  "window": {"T": 1.0, "W": 4.0}
})";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ParsesMinimalDocument) {
  const RunConfig rc = parse_config(kMinimal);
  EXPECT_EQ(rc.sweep.grid.n_points, 32);
  ASSERT_EQ(rc.sweep.points.size(), 2u);
  EXPECT_EQ(rc.sweep.points[1].mu, -0.99);
  EXPECT_EQ(rc.sweep.input.t0, 0.0);
  EXPECT_EQ(rc.sweep.mirror, kDefaultMirrorConvention);
  EXPECT_EQ(rc.sweep.time_fraction, 1.0);
  EXPECT_FALSE(rc.simulate_outcome.has_value());
}

TEST(Config, CartesianProductOfLists) {
  std::string text = kMinimal;
  text.replace(text.find("\"sigma\": 1.5"), 12, "\"sigma\": [1.5, 2.0, 2.5]");
  const RunConfig rc = parse_config(text);
  ASSERT_EQ(rc.sweep.points.size(), 6u);
  EXPECT_EQ(rc.sweep.points[2].sigma, 2.5);
  EXPECT_EQ(rc.sweep.points[3].mu, -0.99);
}

TEST(Config, OverridesReplaceEveryPoint) {
  const RunConfig rc = parse_config(kMinimal, ConfigOverrides{-0.5, 2.0, 64});
  ASSERT_EQ(rc.sweep.points.size(), 1u);
  EXPECT_EQ(rc.sweep.points[0].mu, -0.5);
  EXPECT_EQ(rc.sweep.points[0].sigma, 2.0);
  EXPECT_EQ(rc.sweep.grid.n_points, 64);
  EXPECT_EQ(rc.echo["grid"]["n_points"], 64);
}

TEST(Config, MalformedJsonReportsLine) {
  const std::string msg = config_error("{\n  \"grid\": {\n    \"omega_min\": 1.0,,\n  }\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, SchemaErrorsNameTheField) {
  std::string text = kMinimal;
  text.replace(text.find("\"n_points\": 32"), 14, "\"n_points\": 1");
  EXPECT_NE(config_error(text).find("grid.n_points"), std::string::npos);

  text = kMinimal;
  text.replace(text.find("\"width\": 1.5"), 12, "\"widht\": 1.5");
  EXPECT_NE(config_error(text).find("input"), std::string::npos);

  text = kMinimal;
  text.replace(text.find("[-0.9, -0.99]"), 13, "[-0.9, 1.0]");
  EXPECT_NE(config_error(text).find("mu"), std::string::npos);

  text = kMinimal;
  text.replace(text.find("\"omega_min\": 1000.0"), 19, "\"omega_min\": -5.0");
  EXPECT_NE(config_error(text).find("grid.omega_min"), std::string::npos);

  EXPECT_NE(config_error("[1, 2]").find("object"), std::string::npos);
}

TEST(Config, MirrorConventionFlag) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), ", \"mirror_convention\": \"omega0_minus_omega_minus\"");
  EXPECT_EQ(parse_config(text).sweep.mirror, MirrorConvention::PumpMinusOmegaMinus);
  text = kMinimal;
  text.insert(text.rfind('}'), ", \"mirror_convention\": \"sideways\"");
  EXPECT_NE(config_error(text).find("mirror_convention"), std::string::npos);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"default.json", "small32.json", "dense8.json", "planted_incomplete.json"}) {
    EXPECT_NO_THROW(load_config(kConfigs + "/" + name)) << name;
  }
  EXPECT_THROW(load_config(kConfigs + "/does_not_exist.json"), ConfigError);
}

// ---------------------------------------------------------------------------
// Command line.

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + kCli + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("eprtele_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_F(CliTest, SweepCsvHasHeaderAndOneRowPerPoint) {
  const CliRun r = run_cli("sweep --config " + kConfigs + "/small32.json");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kSweepCsvHeader);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(CliTest, SweepByteIdenticalAcrossThreadCounts) {
  const std::string a = path("a.csv"), b = path("b.csv");
  ASSERT_EQ(run_cli("sweep --config " + kConfigs + "/small32.json --out " + a, "EPRTELE_THREADS=1").status, 0);
  ASSERT_EQ(run_cli("sweep --config " + kConfigs + "/small32.json --out " + b, "EPRTELE_THREADS=3").status, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST_F(CliTest, SweepJsonEchoesConfig) {
  const CliRun r = run_cli("sweep --format json --config " + kConfigs + "/small32.json --mu -0.95");
  ASSERT_EQ(r.status, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["records"].size(), 2u);
  EXPECT_EQ(doc["config"]["epr"]["schedule"][0]["mu"], -0.95);
}

TEST_F(CliTest, SimulateWritesOutcomeMap) {
  const std::string out = path("map.csv");
  ASSERT_EQ(run_cli("simulate --config " + kConfigs + "/dense8.json --out " + out).status, 0);
  const std::string text = slurp(out);
  EXPECT_EQ(text.substr(0, text.find('\n')), kSimulateCsvHeader);
  EXPECT_NE(text.find("# summary"), std::string::npos);
  EXPECT_NE(text.find("independent of the input"), std::string::npos);  // first point has mu = 0
}

TEST_F(CliTest, VerifyExitCodes) {
  EXPECT_EQ(run_cli("verify --config " + kConfigs + "/dense8.json").status, 0);
  const CliRun bad = run_cli("verify --config " + kConfigs + "/planted_incomplete.json");
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.out.find("FAIL COMPLETENESS"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorExitsTwoWithoutOutput) {
  const std::string cfg = write("bad.json", "{\"grid\": {\"omega_min\": 1.0}");
  const std::string out = path("never.csv");
  EXPECT_EQ(run_cli("sweep --config " + cfg + " --out " + out).status, 2);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run_cli("sweep --config " + path("missing.json")).status, 2);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("").status, 2);
  EXPECT_EQ(run_cli("sweep").status, 2);
  EXPECT_EQ(run_cli("sweep --config " + kConfigs + "/small32.json --format xml").status, 2);
}

TEST_F(CliTest, NumericalFailureExitsOne) {
  std::string text = kMinimal;
  text.replace(text.find("\"center\": 1016.5"), 16, "\"center\": 1001.0");
  const std::string cfg = write("edge.json", text);
  EXPECT_EQ(run_cli("simulate --config " + cfg).status, 1);
}

}  // namespace

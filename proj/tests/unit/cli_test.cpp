#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigctl/config.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SIGCTL_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

// Two full pipeline runs with seed 7 into separate directories; shared by
// every test in the suite.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "sigctl_cli_test";
    fs::remove_all(root_);
    fs::create_directories(root_);
    config_ = (root_ / "small.ini").string();
    std::ofstream(config_) << oracle::small_config_text();
    for (const char* dir : {"a", "b"}) {
      const auto r = run("--config " + config_ + " --seed 7 --out-dir " + (root_ / dir).string() +
                         " run --days 1 --eval-days 2 --eval-seeds 2 --steps 100");
      codes_[dir] = r.code;
      logs_[dir] = r.output;
    }
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static fs::path root_;
  static std::string config_;
  static std::map<std::string, int> codes_;
  static std::map<std::string, std::string> logs_;
};
fs::path Pipeline::root_;
std::string Pipeline::config_;
std::map<std::string, int> Pipeline::codes_;
std::map<std::string, std::string> Pipeline::logs_;

TEST_F(Pipeline, RunSucceedsAndWritesEveryStage) {
  ASSERT_EQ(codes_["a"], 0) << logs_["a"];
  for (const char* f : {"manifest.json", "cycles.csv", "cycles_theta.csv", "rewards.csv", "dataset.csv",
                        "policy_sql.json", "policy_bc.json", "curve_sql.csv", "eval.csv", "eval_curves.csv",
                        "report/table.csv", "report/summary.csv", "report/daily_delay.csv",
                        "report/delay_scatter.csv", "report/qmax_scatter.csv", "obs/flows.csv"}) {
    EXPECT_TRUE(fs::exists(root_ / "a" / f)) << f;
  }
}

TEST_F(Pipeline, SameSeedGivesByteIdenticalReport) {
  ASSERT_EQ(codes_["b"], 0) << logs_["b"];
  for (const char* f : {"report/table.csv", "report/summary.csv", "report/daily_delay.csv",
                        "report/delay_scatter.csv", "dataset.csv", "policy_sql.json", "eval.csv"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
}

TEST_F(Pipeline, MeanRowIsMeanOfDayRows) {
  std::ifstream in(root_ / "a" / "report" / "table.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::pair<double, int>> sums;
  std::map<std::string, double> means;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string policy, day, delay;
    std::getline(ss, policy, ',');
    std::getline(ss, day, ',');
    std::getline(ss, delay, ',');
    if (day == "mean") {
      means[policy] = std::stod(delay);
    } else {
      sums[policy].first += std::stod(delay);
      sums[policy].second += 1;
    }
  }
  ASSERT_EQ(means.size(), 4u);
  for (const auto& [policy, mean] : means) {
    ASSERT_EQ(sums[policy].second, 2) << policy;
    EXPECT_NEAR(mean, sums[policy].first / 2.0, 1e-9 * std::abs(mean)) << policy;
  }
}

TEST_F(Pipeline, StageRerunIsIdempotent) {
  const auto before = slurp(root_ / "a" / "cycles.csv");
  const auto r = run("--config " + config_ + " --seed 7 --out-dir " + (root_ / "a").string() + " decompose");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(root_ / "a" / "cycles.csv"), before);
}

TEST_F(Pipeline, MismatchedConfigRefusedWithBothHashes) {
  const auto other = (root_ / "other.ini").string();
  std::ofstream(other) << replace(oracle::small_config_text(), "gamma = 0.99", "gamma = 0.9");
  const auto expected = sigctl::load_config(other).hash();
  const auto found = sigctl::load_config(config_).hash();
  const auto r = run("--config " + other + " --seed 7 --out-dir " + (root_ / "a").string() + " infer");
  EXPECT_EQ(r.code, 4) << r.output;
  EXPECT_NE(r.output.find("\"error\":\"hash_mismatch\""), std::string::npos) << r.output;
  EXPECT_NE(r.output.find(expected), std::string::npos) << r.output;
  EXPECT_NE(r.output.find(found), std::string::npos) << r.output;
}

TEST(Cli, MissingInputsIsDataError) {
  const auto dir = fs::temp_directory_path() / "sigctl_cli_empty";
  fs::remove_all(dir);
  const auto r = run("--config " + oracle::config_path("ci.ini") + " --out-dir " + dir.string() + " decompose");
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("\"error\":\"data\""), std::string::npos) << r.output;
  fs::remove_all(dir);
}

TEST(Cli, BadConfigIsConfigError) {
  const auto path = fs::temp_directory_path() / "sigctl_bad.ini";
  std::ofstream(path) << replace(oracle::small_config_text(), "green_ratios = 0.25 0.25 0.25 0.25",
                                 "green_ratios = 0.3 0.3 0.3 0.2");
  const auto r = run("--config " + path.string() + " simulate --days 1");
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("green ratios sum 1.1"), std::string::npos) << r.output;
  fs::remove(path);
}

TEST(Cli, HelpListsUnits) {
  for (const char* cmd : {"simulate", "train", "evaluate", "run", "curve"}) {
    const auto r = run(std::string(cmd) + " --help");
    EXPECT_EQ(r.code, 0) << cmd;
    EXPECT_TRUE(r.output.find("(s)") != std::string::npos || r.output.find("(days)") != std::string::npos ||
                r.output.find("(count)") != std::string::npos || r.output.find("veh") != std::string::npos)
        << cmd << "\n"
        << r.output;
  }
  const auto top = run("--help");
  for (const char* flag : {"--config", "--seed", "--out-dir", "--jobs"})
    EXPECT_NE(top.output.find(flag), std::string::npos) << flag;
}

TEST(Cli, CurveDumpsOneRowPerSecond) {
  const auto r = run("curve --vn 0.1 --vs 0.5 --xi0 2 --red 30 --green 30 --flow 6");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.rfind("t,A,D,xi1,xi2,xi\n", 0), 0u);
  EXPECT_NE(r.output.find("\n40,6.000000,4.000000,"), std::string::npos) << r.output;
}

}  // namespace

// Copyright 2026 The wpmec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "testing.hpp"
#include "wpmec/cli.hpp"

namespace wpmec {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wpmec_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  // Runs the installed binary; returns its exit status, stderr in err_.
  int run(const std::string& args) {
    const std::string cmd = std::string(WPMEC_CLI_PATH) + " " + args + " > " + path("stdout") +
                            " 2> " + path("stderr");
    const int status = std::system(cmd.c_str());
    err_ = slurp(path("stderr"));
    out_ = slurp(path("stdout"));
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
  std::string out_, err_;
};

const char* kSolveMinimal = R"(
[instance]
N = 4
K = 3
T = 0.1
seed = 3
)";

const char* kSolveNoHelpers = R"(
[instance]
N = 2
K = 0
T = 0.1
P_max = 2
channels = explicit
g0.re = 1e-3, -2e-3
g0.im = 5e-4, 0
)";

const char* kSweepSmall = R"(
[instance]
N = 4
K = 3
T = 0.1
[sweep]
variable = T
values = 0.05, 0.1
trials = 2
seed = 9
)";

TEST_F(CliTest, SolveMinimalConfig) {
  const std::string cfg = write("solve.ini", kSolveMinimal);
  ASSERT_EQ(run("solve " + cfg + " -o " + path("report.json")), 0) << err_;
  const auto j = nlohmann::json::parse(slurp(path("report.json")));
  const auto& p = j["schemes"]["proposed"];
  EXPECT_TRUE(p["feasible"].get<bool>());
  EXPECT_LE(p["duality_gap"].get<double>(), 1e-4);
  EXPECT_LE(p["kkt"]["stationarity"].get<double>(), 1e-6);
  EXPECT_EQ(p["ell"].size(), 4u);
  EXPECT_EQ(p["t"].size(), 3u);
  EXPECT_TRUE(p.contains("trace_Q"));
  EXPECT_TRUE(p.contains("wall_seconds"));
  EXPECT_GE(p["objective_bits"].get<double>(), j["schemes"]["equal_time"]["objective_bits"].get<double>());
  // Defaults are echoed.
  EXPECT_EQ(j["parameters"]["instance.P_max"], "3");
  EXPECT_EQ(j["parameters"]["geometry.d_et_user"], "5");
}

TEST_F(CliTest, SolveWithoutHelpersIsLocalOnly) {
  const std::string cfg = write("k0.ini", kSolveNoHelpers);
  std::ostringstream out, err;
  ASSERT_EQ(cmd_solve(cfg, path("k0.json"), out, err), kExitOk) << err.str();
  const auto j = nlohmann::json::parse(slurp(path("k0.json")));
  const double p = j["schemes"]["proposed"]["objective_bits"].get<double>();
  const double l = j["schemes"]["local_only"]["objective_bits"].get<double>();
  EXPECT_LT(testing::rel(p, l), 1e-6);
}

TEST_F(CliTest, MissingKeyNamesIt) {
  const std::string cfg = write("bad.ini", "[instance]\nN = 4\nK = 3\n");
  EXPECT_EQ(run("solve " + cfg + " -o " + path("r.json")), 2);
  EXPECT_NE(err_.find("'T'"), std::string::npos) << err_;
}

TEST_F(CliTest, MalformedInputsAreConfigErrors) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_solve(path("nope.ini"), path("r.json"), out, err), kExitConfig);
  EXPECT_EQ(cmd_solve(write("a.ini", "[instance]\nN = four\nK = 1\nT = 1\n"), path("r.json"), out, err),
            kExitConfig);
  EXPECT_EQ(cmd_solve(write("b.ini", "N = 4\n"), path("r.json"), out, err), kExitConfig);
  EXPECT_EQ(cmd_solve(write("c.ini", "[instance]\nN = 2\nK = 1\nT = 0.1\nzeta = 0.5, 0.5, 0.5\n"),
                      path("r.json"), out, err),
            kExitConfig);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("solve"), 2);
}

TEST_F(CliTest, UnusedKeysWarn) {
  const std::string cfg = write("typo.ini", std::string(kSolveMinimal) + "Pmax = 4\n");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_solve(cfg, path("r.json"), out, err), kExitOk);
  EXPECT_NE(err.str().find("instance.Pmax"), std::string::npos);
}

TEST_F(CliTest, SweepCsvSchemaAndDeterminism) {
  const std::string cfg = write("sweep.ini", kSweepSmall);
  ASSERT_EQ(run("sweep " + cfg + " -o " + path("a.csv")), 0) << err_;
  ASSERT_EQ(run("sweep " + cfg + " -o " + path("b.csv")), 0) << err_;
  const std::string a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  std::istringstream in(a);
  std::string line;
  std::vector<std::string> rows;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header) {
      EXPECT_EQ(line, "sweep_var,sweep_value,scheme,trials,mean_bits,stderr_bits,mean_gap,failures");
      header = true;
      continue;
    }
    rows.push_back(line);
  }
  EXPECT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].rfind("T,0.050000000000000003,proposed,2,", 0), 0u) << rows[0];
  EXPECT_NE(rows[2].find(",nan,0"), std::string::npos) << rows[2];
  EXPECT_NE(a.find("# sweep.seed = 9"), std::string::npos);
  EXPECT_NE(a.find("# instance.P_max = 3"), std::string::npos);
  EXPECT_NE(a.find("# geometry.d_user_helper = 2, 3, 5"), std::string::npos);
}

TEST_F(CliTest, SweepEmptyValuesIsConfigError) {
  std::string text = kSweepSmall;
  text.replace(text.find("values = 0.05, 0.1"), 18, "values =");
  EXPECT_EQ(run("sweep " + write("empty.ini", text) + " -o " + path("e.csv")), 2);
  EXPECT_NE(err_.find("value list is empty"), std::string::npos) << err_;
}

std::string verify_config(const std::string& extra) {
  return "[instance]\nN = 2\nK = 1\nT = 0.1\n[geometry]\nd_et_helper = 5\nd_user_helper = 2\n"
         "[verify]\nseeds = 2\ntime_grid = 200\n" + extra;
}

TEST_F(CliTest, VerifyPasses) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_verify(write("v.ini", verify_config("")), out, err), kExitOk) << out.str() << err.str();
  EXPECT_NE(out.str().find("verify: PASS"), std::string::npos);
  EXPECT_NE(out.str().find("max deviation"), std::string::npos);
}

TEST_F(CliTest, VerifyZeroSeeds) {
  std::string text = verify_config("");
  text.replace(text.find("seeds = 2"), 9, "seeds = 0");
  EXPECT_EQ(run("verify " + write("z.ini", text)), 2);
}

TEST_F(CliTest, VerifyCatchesSabotagedFloor) {
  const std::string cfg = write("s.ini", verify_config("[solver]\nlambda_min = 1\n"));
  const int code = run("verify " + cfg);
  EXPECT_NE(code, 0);
  EXPECT_NE(out_.find("gap"), std::string::npos) << out_ << err_;
  EXPECT_NE(out_.find("verify: FAIL"), std::string::npos) << out_ << err_;
}

TEST_F(CliTest, VerifyRejectsLargeInstances) {
  const std::string cfg = write("big.ini", "[instance]\nN = 4\nK = 3\nT = 0.1\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify(cfg, out, err), kExitConfig);
}

TEST_F(CliTest, ShippedConfigsParse) {
  for (const char* name : {"fig3.ini", "fig4.ini", "fig5.ini"}) {
    Config cfg = Config::load(std::string(WPMEC_CONFIG_DIR) + "/" + name);
    const Instance base = instance_from_config(cfg);
    geometry_from_config(cfg, base.K);
    const SweepConfig s = sweep_from_config(cfg);
    EXPECT_GE(s.trials, 200) << name;
    EXPECT_TRUE(cfg.unused().empty()) << name;
  }
}

}  // namespace
}  // namespace wpmec

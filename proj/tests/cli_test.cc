// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpaudit/csv.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpaudit {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dpaudit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code =
      RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpaudit_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path WriteConfig(const std::string& text) {
    const fs::path p = dir_ / "exp.ini";
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

TEST_F(CliTest, Accountant) {
  const Outcome r =
      Invoke({"accountant", "--n", "250", "--sigma", "4", "--delta", "1e-5"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_THAT(r.out, HasSubstr("mu=3.95284708"));
  EXPECT_THAT(r.out, HasSubstr("eps=23.99535899"));
}

TEST_F(CliTest, AccountantZeroInsertions) {
  const Outcome r =
      Invoke({"accountant", "--n", "0", "--sigma", "4", "--delta", "1e-5"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_THAT(r.out, HasSubstr("eps=0.00000000"));
}

TEST_F(CliTest, MissingFlagIsUsageError) {
  const Outcome r = Invoke({"accountant", "--n", "250", "--sigma", "4"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_THAT(r.err, HasSubstr("--delta"));
  EXPECT_THAT(r.err, HasSubstr("Usage"));
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
}

TEST_F(CliTest, BadValueIsUsageError) {
  const Outcome r =
      Invoke({"accountant", "--n", "1", "--sigma", "0", "--delta", "1e-5"});
  EXPECT_NE(r.code, kExitOk);
  EXPECT_THAT(r.err, HasSubstr("sigma"));
}

TEST_F(CliTest, HelpExitsCleanly) {
  const Outcome r = Invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_THAT(r.out, HasSubstr("simulate-hidden"));
}

TEST_F(CliTest, AuditWritesFilesDeterministically) {
  const fs::path cfg = WriteConfig(
      "[experiment]\npreset = housing\n"
      "[train]\nsteps = 5\nruns = 40\nbatch_size = 20\n"
      "[dataset]\nn = 40\n"
      "[adversary]\nkind = gc-r\n");
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  const Outcome ra = Invoke({"--output-dir", a.string(), "--jobs", "1", "--seed",
                          "3", "audit", cfg.string()});
  ASSERT_EQ(ra.code, kExitOk) << ra.err;
  EXPECT_THAT(ra.out, HasSubstr("adversary=gc-r"));
  const Outcome rb = Invoke({"--output-dir", b.string(), "--jobs", "2", "--seed",
                          "3", "audit", cfg.string()});
  ASSERT_EQ(rb.code, kExitOk) << rb.err;
  for (const char* f : {"report.csv", "scores.csv"}) {
    EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
  }
  EXPECT_THAT(Slurp(a / "config.ini"), HasSubstr("seed = 3"));
  EXPECT_EQ(ReadCsv(a / "scores.csv").rows.size(), 40u);
}

TEST_F(CliTest, AuditConfigErrorNamesField) {
  const fs::path cfg = WriteConfig("[train]\nsigma = lots\n");
  const Outcome r = Invoke({"--output-dir", dir_.string(), "audit", cfg.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_THAT(r.err, HasSubstr("train.sigma"));
  EXPECT_EQ(Invoke({"audit", (dir_ / "missing.ini").string()}).code, kExitUsage);
}

TEST_F(CliTest, SimulateHidden) {
  const Outcome r = Invoke({"--output-dir", dir_.string(), "simulate-hidden",
                         "--steps", "5", "--runs", "400", "--batch", "4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_THAT(r.out, HasSubstr("ratio="));
  const CsvTable t = ReadCsv(dir_ / "sim_curve.csv");
  EXPECT_EQ(t.rows.size(), 5u);
  EXPECT_THAT(Slurp(dir_ / "sim_config.ini"), HasSubstr("batch_b = 4"));
}

TEST_F(CliTest, SimulateHiddenConfigAndOverrides) {
  const fs::path cfg = WriteConfig("[sim]\nsteps = 3\nruns = 300\nsigma = 2\n");
  const Outcome r =
      Invoke({"--output-dir", dir_.string(), "simulate-hidden", "--config",
           cfg.string(), "--steps", "4", "--drift", "constant",
           "--drift-value", "0.5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(ReadCsv(dir_ / "sim_curve.csv").rows.size(), 4u);
  EXPECT_THAT(Slurp(dir_ / "sim_config.ini"), HasSubstr("sigma = 2"));
}

TEST_F(CliTest, SimulateHiddenRejectsLargeDrift) {
  const Outcome r = Invoke({"--output-dir", dir_.string(), "simulate-hidden",
                         "--runs", "100", "--drift", "constant",
                         "--drift-value", "5"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_THAT(r.err, HasSubstr("BC"));
  const Outcome bad = Invoke({"simulate-hidden", "--drift", "sideways"});
  EXPECT_EQ(bad.code, kExitUsage);
}

TEST_F(CliTest, AmpGrid) {
  const Outcome r =
      Invoke({"--output-dir", dir_.string(), "amp-grid", "--steps", "4",
           "--runs", "300", "--batches", "1,16", "--sigmas", "1,2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(ReadCsv(dir_ / "amp_grid.csv").rows.size(), 4u);
}

TEST_F(CliTest, ThresholdSearch) {
  const Outcome r = Invoke({"--output-dir", dir_.string(), "threshold-search",
                         "--runs", "300", "--d", "6"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_THAT(r.out, HasSubstr("best_h="));
  EXPECT_EQ(ReadCsv(dir_ / "threshold_search.csv").rows.size(), 6u);
}

TEST_F(CliTest, Profile) {
  const Outcome r = Invoke({"--output-dir", dir_.string(), "profile", "--mu", "1",
                         "--eps-max", "2", "--points", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const CsvTable t = ReadCsv(dir_ / "profile.csv");
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_NEAR(std::stod(t.rows[0][1]), 0.38292492254802621, 1e-12);
}

TEST_F(CliTest, OutputDirFromEnvironment) {
  setenv(kOutputDirEnv, dir_.string().c_str(), 1);
  const Outcome r = Invoke({"profile", "--mu", "0.5", "--points", "2"});
  unsetenv(kOutputDirEnv);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "profile.csv"));
}

}  // namespace
}  // namespace dpaudit

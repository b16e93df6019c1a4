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

#include "dpaudit/hidden_state_sim.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dpaudit/csv.h"
#include "dpaudit/gdp_math.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpaudit {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

SimConfig Small() {
  SimConfig cfg;
  cfg.steps = 6;
  cfg.runs = 2000;
  cfg.jobs = 1;
  return cfg;
}

TEST(GWorstCaseTest, Branches) {
  EXPECT_EQ(GWorstCase(0.6, 2, 1.0, 0.5), 2.0);
  EXPECT_EQ(GWorstCase(0.4, 2, 1.0, 0.5), -2.0);
  EXPECT_EQ(GWorstCase(0.5, 2, 1.0, 0.5), -2.0);
  EXPECT_EQ(GWorstCase(-1e9, 3, 0.5, 0.0), -1.5);
}

TEST(OptimalThresholdTest, HalfOfC) {
  EXPECT_EQ(OptimalThreshold(1.0), 0.5);
  EXPECT_EQ(OptimalThreshold(4.0), 2.0);
  EXPECT_DOUBLE_EQ(OptimalThreshold(0.1), 0.05);
  EXPECT_THROW(OptimalThreshold(0.0), std::domain_error);
}

TEST(DriftFunctionTest, ConstantIsBounded) {
  const DriftFunction g = DriftFunction::Constant(1.5);
  EXPECT_EQ(g(123.0, 2, 1.0), 1.5);
  EXPECT_THROW(g(0.0, 1, 1.0), std::domain_error);
  const DriftFunction w = DriftFunction::WorstCase(0.5);
  for (double x = -3; x < 3; x += 0.1) {
    EXPECT_LE(std::abs(w(x, 4, 0.25)), 1.0);
  }
}

TEST(SimulatePairTest, NoiselessTrajectories) {
  SimConfig cfg;
  cfg.steps = 4;
  cfg.sigma = 1e-12;
  const DriftFunction g = DriftFunction::WorstCase(OptimalThreshold(1.0));
  Rng rng(1);
  // Canary: theta_1 = 1 > h*, and each step adds +BC / B = 1.
  const SimTrajectory in = SimulatePair(cfg, g, rng, true);
  ASSERT_EQ(in.theta.size(), 4u);
  const std::vector<double> up = {1, 2, 3, 4};
  const std::vector<double> down = {0, -1, -2, -3};
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(in.theta[t], up[t], 1e-9);
  // No canary: theta_1 = 0 <= h*, and each step subtracts 1.
  const SimTrajectory out = SimulatePair(cfg, g, rng, false);
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(out.theta[t], down[t], 1e-9);
  EXPECT_TRUE(in.with_canary);
  EXPECT_FALSE(out.with_canary);
}

TEST(SimulatePairTest, BatchDividesDriftAndNoise) {
  SimConfig cfg;
  cfg.steps = 3;
  cfg.batch_b = 4;
  cfg.sigma = 1e-12;
  Rng rng(1);
  const SimTrajectory t =
      SimulatePair(cfg, DriftFunction::Constant(2.0), rng, true);
  EXPECT_NEAR(t.theta[1], 1.5, 1e-9);
  EXPECT_NEAR(t.theta[2], 2.0, 1e-9);
}

TEST(SimulatePairTest, FirstStepMoments) {
  SimConfig cfg;
  cfg.steps = 1;
  cfg.sigma = 2.0;
  cfg.clip_c = 0.5;
  const DriftFunction g = DriftFunction::WorstCase(0.25);
  Rng rng = MakeStream(3, StreamTag::kSimulation);
  const int n = 20000;
  double mean_in = 0, mean_out = 0, sq_out = 0;
  for (int i = 0; i < n; ++i) {
    mean_in += SimulatePair(cfg, g, rng, true).theta[0];
    const double x = SimulatePair(cfg, g, rng, false).theta[0];
    mean_out += x;
    sq_out += x * x;
  }
  mean_in /= n;
  mean_out /= n;
  const double sd = std::sqrt(sq_out / n - mean_out * mean_out);
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(mean_in, 0.5, 4 * se);
  EXPECT_NEAR(mean_out, 0.0, 4 * se);
  EXPECT_NEAR(sd, 1.0, 0.03);
}

TEST(AuditSimTest, FirstStepIsAGaussianMechanism) {
  SimConfig cfg = Small();
  cfg.runs = 5000;
  const SimCurve curve =
      AuditSim(cfg, DriftFunction::WorstCase(OptimalThreshold(1.0)));
  const double eps_true = GdpToEps(GdpMu{1.0}, cfg.delta);
  EXPECT_DOUBLE_EQ(curve.eps_theory, eps_true);
  ASSERT_EQ(curve.reports.size(), 6u);
  EXPECT_LE(curve.eps_hat()[0], eps_true);
  EXPECT_GE(curve.eps_hat()[0], 0.8 * eps_true);
}

TEST(AuditSimTest, DeterministicAndJobIndependent) {
  SimConfig cfg = Small();
  const DriftFunction g = DriftFunction::WorstCase(0.5);
  const std::vector<double> a = AuditSim(cfg, g).eps_hat();
  cfg.jobs = 3;
  EXPECT_EQ(AuditSim(cfg, g).eps_hat(), a);
  cfg.seed = 1;
  EXPECT_NE(AuditSim(cfg, g).eps_hat(), a);
}

TEST(AuditSimTest, DriftDoesNotChangeFirstStep) {
  const SimConfig cfg = Small();
  const auto a = AuditSim(cfg, DriftFunction::WorstCase(0.5)).eps_hat();
  const auto b = AuditSim(cfg, DriftFunction::Constant(0.3)).eps_hat();
  EXPECT_EQ(a[0], b[0]);
}

TEST(AuditSimTest, LargeBatchKeepsTheInformation) {
  SimConfig cfg = Small();
  cfg.batch_b = 16;
  const auto eps =
      AuditSim(cfg, DriftFunction::WorstCase(OptimalThreshold(1.0))).eps_hat();
  EXPECT_GE(AmplificationRate(eps), 0.85);
}

TEST(AuditSimTest, ConstantDriftDecays) {
  SimConfig cfg = Small();
  cfg.steps = 16;
  cfg.sigma = 0.5;
  const auto eps = AuditSim(cfg, DriftFunction::Constant(1.0)).eps_hat();
  EXPECT_LT(eps.back(), 0.5 * eps.front());
}

TEST(ValidateSimConfigTest, NamesTheField) {
  SimConfig cfg;
  cfg.batch_b = 0;
  try {
    ValidateSimConfig(cfg);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_THAT(e.what(), HasSubstr("sim.batch_b"));
  }
  cfg = SimConfig{};
  cfg.runs = 1;
  EXPECT_THROW(ValidateSimConfig(cfg), std::invalid_argument);
  cfg = SimConfig{};
  cfg.sigma = 0;
  EXPECT_THROW(AuditSim(cfg, DriftFunction::WorstCase(0.5)),
               std::invalid_argument);
}

TEST(AmplificationRateTest, Values) {
  EXPECT_EQ(AmplificationRate(std::vector<double>{2, 2}), 1.0);
  EXPECT_EQ(AmplificationRate(std::vector<double>{2, 1}), 0.5);
  EXPECT_EQ(AmplificationRate(std::vector<double>{2, 3, 1}), 0.5);
  EXPECT_THROW(AmplificationRate(std::vector<double>{0, 1}), std::domain_error);
  EXPECT_THROW(AmplificationRate(std::vector<double>{1}), std::domain_error);
}

TEST(AmpGridTest, CellsInOrder) {
  SimConfig cfg = Small();
  cfg.runs = 500;
  const std::vector<int64_t> bs = {1, 4};
  const std::vector<double> sigmas = {1, 2, 100};
  const auto cells = AmpGrid(cfg, bs, sigmas);
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells[4].batch_b, 4);
  EXPECT_EQ(cells[4].sigma, 2.0);
  EXPECT_EQ(cells[2].sigma, 100.0);
  for (const auto& c : cells) {
    if (!std::isnan(c.ratio)) EXPECT_GE(c.ratio, 0.0);
  }
  EXPECT_GT(cells[3].ratio, 0.0);
}

TEST(ThresholdSearchTest, GridShape) {
  SimConfig cfg = Small();
  cfg.runs = 1000;
  const ThresholdSearchResult r = ThresholdSearch(cfg, 2);
  ASSERT_EQ(r.thresholds.size(), 2u);
  EXPECT_EQ(r.alphas[0], 0.0);
  EXPECT_EQ(r.thresholds[0], std::numeric_limits<double>::infinity());
  EXPECT_NEAR(r.alphas[1], StdNormalCdf(0.5), 1e-15);
  EXPECT_NEAR(r.thresholds[1], -0.5, 1e-12);
  EXPECT_THROW(ThresholdSearch(cfg, 1), std::invalid_argument);
}

TEST(ThresholdSearchTest, ThresholdsDecreaseAndCoverHStar) {
  for (double sigma : {0.5, 1.0, 4.0}) {
    SimConfig cfg = Small();
    cfg.runs = 500;
    cfg.sigma = sigma;
    const ThresholdSearchResult r = ThresholdSearch(cfg, 20);
    for (size_t i = 1; i < r.thresholds.size(); ++i) {
      EXPECT_LT(r.thresholds[i], r.thresholds[i - 1]);
    }
    EXPECT_LT(r.thresholds.back(), 0.5);
    EXPECT_EQ(r.best_eps, r.eps_hat[r.best_index]);
    for (double e : r.eps_hat) EXPECT_LE(e, r.best_eps);
  }
}

TEST(CsvWritersTest, Headers) {
  const fs::path dir = fs::temp_directory_path() / "dpaudit_sim_csv";
  fs::create_directories(dir);
  SimConfig cfg = Small();
  cfg.runs = 200;
  WriteSimCurveCsv(dir / "c.csv", AuditSim(cfg, DriftFunction::WorstCase(0.5)));
  const CsvTable c = ReadCsv(dir / "c.csv");
  EXPECT_EQ(c.header, (std::vector<std::string>{"t", "eps_hat", "eps_theory"}));
  EXPECT_EQ(c.rows.size(), 6u);
  EXPECT_EQ(c.rows[5][0], "6");
  const std::vector<int64_t> bs = {1};
  const std::vector<double> sigmas = {1};
  WriteAmpGridCsv(dir / "a.csv", AmpGrid(cfg, bs, sigmas));
  EXPECT_EQ(ReadCsv(dir / "a.csv").header,
            (std::vector<std::string>{"B", "sigma", "ratio"}));
  WriteThresholdSearchCsv(dir / "t.csv", ThresholdSearch(cfg, 5));
  EXPECT_EQ(ReadCsv(dir / "t.csv").rows.size(), 5u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dpaudit

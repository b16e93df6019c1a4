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

#include "dpaudit/dpsgd.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <stdexcept>
#include <type_traits>

#include "dpaudit/adversaries.h"
#include "dpaudit/dataset.h"
#include "dpaudit/mlp.h"
#include "dpaudit/random.h"
#include "gtest/gtest.h"

namespace dpaudit {
namespace {

MlpModel RandomModel(const MlpArchitecture& arch, uint64_t seed,
                     double scale = 1.0) {
  Rng rng = MakeStream(seed, StreamTag::kInit);
  MlpModel m = MlpModel::GlorotInit(arch, rng);
  NormalSampler normal;
  // Non-zero biases so every parameter gets a generic gradient.
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.mutable_params()[i] += 0.3 * scale * normal(rng);
  }
  return m;
}

// Central differences of example i's loss.
Eigen::VectorXd FiniteDifference(const MlpModel& model,
                                 const Eigen::MatrixXd& x, double y) {
  const double h = 1e-5;
  Eigen::VectorXd g(model.size());
  Eigen::VectorXd yv(1);
  yv[0] = y;
  for (Eigen::Index j = 0; j < model.size(); ++j) {
    Eigen::VectorXd p = model.params();
    p[j] += h;
    const double up = MeanLoss(MlpModel(model.architecture(), p), x, yv);
    p[j] -= 2 * h;
    const double down = MeanLoss(MlpModel(model.architecture(), p), x, yv);
    g[j] = (up - down) / (2 * h);
  }
  return g;
}

TEST(ClipTest, Cases) {
  Eigen::VectorXd g(2);
  g << 1.2, 1.6;  // norm 2
  EXPECT_TRUE(Clip(g, 1.0).isApprox(g / 2.0, 1e-15));
  Eigen::VectorXd small(2);
  small << 0.3, 0.4;
  EXPECT_EQ(Clip(small, 1.0), small);
  EXPECT_EQ(Clip(Eigen::VectorXd::Zero(3), 0.1), Eigen::VectorXd::Zero(3));
  EXPECT_THROW(Clip(g, 0.0), std::domain_error);
}

TEST(ClipTest, NormNeverExceedsBound) {
  Rng rng = MakeStream(1, StreamTag::kNoise);
  NormalSampler normal;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd g(17);
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = 10 * normal(rng);
    const double c = 0.01 + trial * 0.05;
    EXPECT_LE(Clip(g, c).norm(), c * (1 + 1e-15));
  }
}

TEST(DatasetTest, DeterministicAndSeedSensitive) {
  const Dataset a = MakeDataset(1, 4, 2);
  const Dataset b = MakeDataset(1, 4, 2);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_NE(MakeDataset(2, 4, 2).features, a.features);
}

TEST(DatasetTest, ClassesAreBalanced) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    for (int64_t n : {16, 64, 400}) {
      const Dataset d = MakeDataset(seed, n, 8);
      const double frac = d.targets.mean();
      EXPECT_GE(frac, 0.4);
      EXPECT_LE(frac, 0.6);
    }
  }
}

TEST(DatasetTest, CsvRoundTrip) {
  const Dataset d = MakeDataset(3, 20, 3);
  const auto path = std::filesystem::temp_directory_path() / "dpaudit_ds.csv";
  SaveDatasetCsv(d, path);
  const Dataset back = LoadDatasetCsv(path);
  EXPECT_TRUE(back.features.isApprox(d.features, 1e-15));
  EXPECT_EQ(back.targets, d.targets);
  std::filesystem::remove(path);
}

TEST(FixedBatchesTest, OneEpochIsAPartition) {
  const BatchSchedule s = FixedBatches(7, 4, 2, 2);
  ASSERT_EQ(s.batches.size(), 2u);
  std::set<int64_t> seen;
  for (const auto& b : s.batches) {
    EXPECT_EQ(b.size(), 2u);
    seen.insert(b.begin(), b.end());
  }
  EXPECT_EQ(seen, (std::set<int64_t>{0, 1, 2, 3}));
  EXPECT_EQ(FixedBatches(7, 4, 2, 2).batches, s.batches);
}

TEST(FixedBatchesTest, FullBatch) {
  const BatchSchedule s = FixedBatches(1, 400, 400, 250);
  ASSERT_EQ(s.batches.size(), 250u);
  for (const auto& b : s.batches) {
    EXPECT_EQ(std::set<int64_t>(b.begin(), b.end()).size(), 400u);
  }
  EXPECT_THROW(FixedBatches(1, 4, 5, 1), std::domain_error);
}

TEST(MlpTest, ParameterCounts) {
  EXPECT_EQ(HousingArchitecture().ParameterCount(), 61);
  EXPECT_EQ(OverparameterizedArchitecture().ParameterCount(), 4225);
  EXPECT_THROW(ValidateArchitecture({{3, 2}, Activation::kTanh}),
               std::domain_error);
}

TEST(MlpTest, ZeroModelLossIsLog2) {
  const MlpModel zero(MlpArchitecture{{3, 1}, Activation::kTanh});
  const Dataset d = MakeDataset(1, 10, 3);
  const LossAndGradients lg = LossAndGrad(zero, d.features, d.targets);
  EXPECT_NEAR(lg.loss, std::log(2.0), 1e-15);
  Canary canary{d.features.row(0).transpose(), 1.0, 0};
  EXPECT_NEAR(ScoreLoss(zero, canary), std::log(2.0), 1e-15);
}

TEST(MlpTest, GradientsMatchFiniteDifferences) {
  const MlpArchitecture archs[] = {
      HousingArchitecture(),
      {{5, 4, 3, 1}, Activation::kTanh},
      {{4, 1}, Activation::kTanh},
  };
  int pairs = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const MlpArchitecture& arch = archs[trial % 3];
    const MlpModel model = RandomModel(arch, 100 + trial);
    const Dataset d = MakeDataset(200 + trial, 6, arch.widths.front());
    const int i = trial % 6;
    const Eigen::MatrixXd x = d.features.row(i);
    const LossAndGradients lg = LossAndGrad(model, d.features, d.targets);
    const Eigen::VectorXd analytic = lg.per_example.row(i).transpose();
    const Eigen::VectorXd fd = FiniteDifference(model, x, d.targets[i]);
    EXPECT_LE((analytic - fd).norm(), 1e-5 * analytic.norm())
        << "trial " << trial;
    ++pairs;
  }
  EXPECT_EQ(pairs, 20);
}

TEST(MlpTest, ReluGradientsMatchAwayFromKinks) {
  const MlpArchitecture arch{{4, 5, 1}, Activation::kRelu};
  const MlpModel model = RandomModel(arch, 9);
  const Dataset d = MakeDataset(9, 3, 4);
  const LossAndGradients lg = LossAndGrad(model, d.features, d.targets);
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd fd =
        FiniteDifference(model, d.features.row(i), d.targets[i]);
    const Eigen::VectorXd analytic = lg.per_example.row(i).transpose();
    EXPECT_LE((analytic - fd).norm(), 1e-5 * analytic.norm());
  }
}

TEST(MlpTest, DuplicateExamplesGetIdenticalGradients) {
  const MlpModel model = RandomModel(HousingArchitecture(), 4);
  const Dataset d = MakeDataset(4, 5, 8);
  Eigen::MatrixXd x(2, 8);
  x.row(0) = d.features.row(2);
  x.row(1) = d.features.row(2);
  Eigen::VectorXd y(2);
  y << d.targets[2], d.targets[2];
  const LossAndGradients lg = LossAndGrad(model, x, y);
  EXPECT_EQ(lg.per_example.row(0), lg.per_example.row(1));
}

TEST(MlpTest, GhostNormClippedSumMatchesMaterialized) {
  for (double c : {0.05, 0.5, 100.0}) {
    const MlpModel model = RandomModel(OverparameterizedArchitecture(), 5);
    const Dataset d = MakeDataset(5, 16, 32);
    const LossAndGradients lg = LossAndGrad(model, d.features, d.targets);
    Eigen::VectorXd want = Eigen::VectorXd::Zero(model.size());
    double max_norm = 0.0;
    for (Eigen::Index i = 0; i < lg.per_example.rows(); ++i) {
      const Eigen::VectorXd g = lg.per_example.row(i).transpose();
      max_norm = std::max(max_norm, g.norm());
      want += Clip(g, c);
    }
    Eigen::VectorXd sum;
    GradientWorkspace ws;
    const ClippedSumStats stats =
        ClippedGradientSum(model, d.features, d.targets, c, sum, ws);
    EXPECT_TRUE(sum.isApprox(want, 1e-10)) << c;
    EXPECT_NEAR(stats.max_norm, max_norm, 1e-10 * max_norm);
    EXPECT_LE(stats.max_clipped_norm, c * (1 + 1e-12));
    EXPECT_NEAR(stats.mean_loss, lg.loss, 1e-12);
  }
}

TEST(MlpTest, NonFiniteInputDiverges) {
  const MlpModel model = RandomModel(HousingArchitecture(), 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 8);
  x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(LossAndGrad(model, x, Eigen::VectorXd::Zero(1)),
               TrainingDivergence);
}

TrainConfig NoiselessConfig() {
  TrainConfig cfg;
  cfg.eta = 0.5;
  cfg.clip_c = 1.0;
  cfg.sigma = 1e-300;
  cfg.steps = 1;
  cfg.batch_size = 4;
  cfg.runs = 1;
  return cfg;
}

TEST(DpsgdStepTest, NoiselessUnclippedLimitIsSgd) {
  TrainConfig cfg = NoiselessConfig();
  cfg.clip_c = 1e12;
  cfg.sigma = 1e-300;
  const Dataset d = MakeDataset(2, 4, 8);
  const MlpModel model = RandomModel(HousingArchitecture(), 2);
  const std::vector<int64_t> batch = {0, 1, 2, 3};
  Rng rng(1);
  const MlpModel next = DpsgdStep(model, d, batch, cfg, {}, rng);
  const LossAndGradients lg = LossAndGrad(model, d.features, d.targets);
  const Eigen::VectorXd mean_grad = lg.per_example.colwise().mean().transpose();
  EXPECT_TRUE(next.params().isApprox(model.params() - 0.5 * mean_grad, 1e-12));
}

TEST(DpsgdStepTest, CraftedGradientOnFlatLandscape) {
  // Zero features and a zero model: the weight gradients vanish and the two
  // bias gradients cancel.
  MlpArchitecture arch{{2, 1}, Activation::kTanh};
  MlpModel model(arch);
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(2, 2);
  d.targets.resize(2);
  d.targets << 0.0, 1.0;
  TrainConfig cfg = NoiselessConfig();
  cfg.eta = 0.1;
  cfg.batch_size = 2;
  cfg.sigma = 2.0;
  const CraftedGradient crafted = [&] {
    Rng r(3);
    CraftedGradient g = CraftRandomDim(arch.ParameterCount(), cfg.clip_c, r);
    g.vector.setZero();
    g.vector[1] = cfg.clip_c;
    g.biased_dim = 1;
    return g;
  }();
  Rng noise_a(42);
  Rng noise_b(42);
  const MlpModel next = DpsgdStep(model, d, {0, 1}, cfg, crafted, noise_a);
  Eigen::VectorXd z(model.size());
  NormalSampler normal;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z[i] = cfg.sigma * cfg.clip_c * normal(noise_b);
  }
  const double step = cfg.eta / cfg.batch_size;
  EXPECT_NEAR(next.params()[1], -step * cfg.clip_c - step * z[1], 1e-15);
  EXPECT_NEAR(next.params()[0], -step * z[0], 1e-15);
}

TEST(DpsgdStepTest, DivergenceIsReported) {
  TrainConfig cfg = NoiselessConfig();
  cfg.eta = 1e308;
  cfg.sigma = 1e10;
  const Dataset d = MakeDataset(2, 4, 8);
  Rng rng(1);
  EXPECT_THROW(DpsgdStep(RandomModel(HousingArchitecture(), 1), d, {0, 1, 2},
                         cfg, {}, rng),
               TrainingDivergence);
}

TEST(TrainTest, InsertionCount) {
  EXPECT_EQ(InsertionCount(1250, 5), 250);
  EXPECT_EQ(InsertionCount(250, 1), 250);
  EXPECT_EQ(InsertionCount(4, 5), 0);
  EXPECT_THROW(InsertionCount(10, 0), std::domain_error);
}

TEST(TrainTest, BitOneIgnoresInsertion) {
  TrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 8;
  const Dataset d = MakeDataset(1, 16, 8);
  const BatchSchedule s = FixedBatches(1, 16, 8, 5);
  const MlpModel init = RandomModel(HousingArchitecture(), 1);
  Rng r(0);
  const Insertion crafted = CraftRandomDim(init.size(), 1.0, r);
  Rng a(9);
  Rng b(9);
  const EndpointParams with =
      Train(cfg, d, s, init, crafted, /*insertion_bit=*/1, a);
  const EndpointParams without = Train(cfg, d, s, init, {}, 1, b);
  EXPECT_EQ(with.final_params, without.final_params);
  EXPECT_EQ(with.initial, init.params());
}

TEST(TrainTest, SingleStepWithInsertion) {
  TrainConfig cfg;
  cfg.steps = 1;
  cfg.batch_size = 8;
  const Dataset d = MakeDataset(1, 16, 8);
  const BatchSchedule s = FixedBatches(1, 16, 8, 1);
  const MlpModel init = RandomModel(HousingArchitecture(), 1);
  Rng r(0);
  const CraftedGradient crafted = CraftRandomDim(init.size(), 1.0, r);
  Rng a(9);
  Rng b(9);
  const EndpointParams trained = Train(cfg, d, s, init, crafted, 0, a);
  const MlpModel step = DpsgdStep(init, d, s.batches[0], cfg, crafted, b);
  EXPECT_EQ(trained.final_params, step.params());
}

TEST(TrainTest, PeriodicInsertionShiftsOnlyAtInsertionSteps) {
  // On a flat landscape the biased coordinate moves by -eta C / B once per
  // insertion, independent of the noise realisation.
  MlpArchitecture arch{{2, 1}, Activation::kTanh};
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(2, 2);
  d.targets.resize(2);
  d.targets << 0.0, 1.0;
  TrainConfig cfg;
  cfg.eta = 0.2;
  cfg.steps = 12;
  cfg.periodicity = 5;
  cfg.batch_size = 2;
  const BatchSchedule s = FixedBatches(1, 2, 2, cfg.steps);
  const MlpModel init(arch);
  CraftedGradient crafted;
  crafted.vector = Eigen::VectorXd::Zero(3);
  crafted.vector[0] = cfg.clip_c;
  crafted.biased_dim = 0;
  Rng a(5);
  Rng b(5);
  const EndpointParams with = Train(cfg, d, s, init, crafted, 0, a);
  const EndpointParams without = Train(cfg, d, s, init, crafted, 1, b);
  const double shift = ScoreDim(with.final_params, init.params(), 0) -
                       ScoreDim(without.final_params, init.params(), 0);
  EXPECT_NEAR(shift, -2.0 * cfg.eta * cfg.clip_c / cfg.batch_size, 1e-12);
}

TEST(TrainTest, HiddenStateDiscipline) {
  // Training hands back only the endpoints, and scoring consumes only them.
  static_assert(std::is_same_v<decltype(Train(
                                   std::declval<const TrainConfig&>(),
                                   std::declval<const Dataset&>(),
                                   std::declval<const BatchSchedule&>(),
                                   std::declval<const MlpModel&>(),
                                   std::declval<const Insertion&>(), 0,
                                   std::declval<Rng&>())),
                               EndpointParams>);
  static_assert(
      std::is_same_v<decltype(&Adversary::Score),
                     double (Adversary::*)(const EndpointParams&) const>);
  static_assert(sizeof(EndpointParams) == 2 * sizeof(Eigen::VectorXd));
  SUCCEED();
}

TEST(TrainTest, RejectsMismatchedConfig) {
  TrainConfig cfg;
  cfg.steps = 3;
  const Dataset d = MakeDataset(1, 8, 8);
  const BatchSchedule s = FixedBatches(1, 8, 4, 2);
  Rng rng(1);
  EXPECT_THROW(Train(cfg, d, s, RandomModel(HousingArchitecture(), 1), {}, 1,
                     rng),
               std::domain_error);
  cfg.periodicity = 0;
  EXPECT_THROW(ValidateTrainConfig(cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.sigma = -1;
  EXPECT_THROW(ValidateTrainConfig(cfg), std::invalid_argument);
  EXPECT_NO_THROW(ValidateTrainConfig(TrainConfig{}));
}

}  // namespace
}  // namespace dpaudit

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

#ifndef DPAUDIT_DPSGD_H_
#define DPAUDIT_DPSGD_H_

#include <cstdint>
#include <optional>
#include <variant>

#include <Eigen/Dense>

#include "dpaudit/dataset.h"
#include "dpaudit/mlp.h"
#include "dpaudit/random.h"

namespace dpaudit {

struct TrainConfig {
  double eta = 0.01;     // learning rate
  double clip_c = 1.0;   // per-example clipping threshold C
  double sigma = 4.0;    // noise multiplier; Z_t ~ N(0, sigma^2 C^2 I)
  int64_t steps = 250;   // T
  int64_t periodicity = 1;  // k: insert at steps t with t mod k == 0
  int64_t batch_size = 400;
  int64_t runs = 5000;   // R
  double delta = 1e-5;
  double confidence = 0.95;
  uint64_t seed = 0;
  // Draw a fresh Glorot initialisation per run that the adversary does not
  // see (it scores against the nominal initialisation instead).
  bool random_init_per_run = false;
};

// Throws std::invalid_argument naming the first offending field.
void ValidateTrainConfig(const TrainConfig& cfg);

// g * min(1, c / |g|_2); the zero vector maps to itself.
Eigen::VectorXd Clip(const Eigen::VectorXd& g, double c);

enum class CraftedKind { kRandomDim, kSimulatedDim, kRandomDirection };

// Gradient an adversary adds to the clipped batch sum at insertion steps. Its
// norm is exactly C; it is never clipped again and does not count towards
// |B_t|.
struct CraftedGradient {
  Eigen::VectorXd vector;
  std::optional<int64_t> biased_dim;
  CraftedKind kind = CraftedKind::kRandomDim;
};

// A mislabelled training point appended to the mini-batch at insertion
// steps; its gradient is clipped like any other example.
struct Canary {
  Eigen::VectorXd features;
  double flipped_label = 0.0;
  int64_t source_index = -1;
};

// What gets inserted at insertion steps.
using Insertion = std::variant<std::monostate, CraftedGradient, Canary>;

// The only output of training visible to adversaries: the initial and the
// final parameters. Intermediate iterates never leave Train().
struct EndpointParams {
  Eigen::VectorXd initial;
  Eigen::VectorXd final_params;
};

// Per-call scratch space for training steps.
struct StepWorkspace {
  GradientWorkspace grad;
  Eigen::MatrixXd batch_x;
  Eigen::VectorXd batch_y;
  Eigen::VectorXd grad_sum;
  Eigen::VectorXd noise;
  NormalSampler normal;
};

// theta <- theta - eta/|B| (sum_x clip(grad l(theta; x), C) + Z [+ insert]),
// with |B| the configured batch size. `insert` is applied only when it holds
// a CraftedGradient or Canary; the noise draw is the same either way.
// Returns the largest clipped per-example norm seen in the step.
double DpsgdStepInPlace(MlpModel& model, const Dataset& data,
                        const std::vector<int64_t>& batch,
                        const TrainConfig& cfg, const Insertion& insert,
                        Rng& noise_rng, StepWorkspace& ws);

MlpModel DpsgdStep(const MlpModel& model, const Dataset& data,
                   const std::vector<int64_t>& batch, const TrainConfig& cfg,
                   const Insertion& insert, Rng& noise_rng);

// Number of steps t in 1..T with t mod k == 0.
int64_t InsertionCount(int64_t steps, int64_t periodicity);

// Runs T DP-SGD steps from `init` over the fixed schedule. The insertion is
// applied at steps t (1-based) with t mod k == 0 if and only if
// insertion_bit == 0. Throws TrainingDivergence on non-finite values.
EndpointParams Train(const TrainConfig& cfg, const Dataset& data,
                     const BatchSchedule& schedule, const MlpModel& init,
                     const Insertion& insertion, int insertion_bit,
                     Rng& noise_rng);

}  // namespace dpaudit

#endif  // DPAUDIT_DPSGD_H_

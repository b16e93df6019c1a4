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

#ifndef DPAUDIT_ADVERSARIES_H_
#define DPAUDIT_ADVERSARIES_H_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "dpaudit/dataset.h"
#include "dpaudit/dpsgd.h"
#include "dpaudit/mlp.h"
#include "dpaudit/random.h"

namespace dpaudit {

// How the simulated-dimension adversary explores training before choosing a
// coordinate to bias.
struct SimStrategy {
  enum class Simulation { kNoisy, kNoiseless };
  enum class Rank { kPerStep, kFinalModel };

  Simulation simulation = Simulation::kNoiseless;
  Rank rank = Rank::kPerStep;
  int sim_runs = 4;
};

enum class AdversaryKind {
  kRandomDim,        // "gc-r"
  kSimulatedDim,     // "gc-s"
  kRandomDirection,  // "cots"
  kLoss,             // "loss"
};

std::string AdversaryName(AdversaryKind kind);
// Throws std::invalid_argument on an unknown name.
AdversaryKind ParseAdversaryKind(const std::string& name);

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::kSimulatedDim;
  SimStrategy strategy;
};

// C e_d for a uniformly random coordinate d.
CraftedGradient CraftRandomDim(int64_t p, double c, Rng& rng);

// Simulates training `strategy.sim_runs` times from theta_0 on the known
// schedule and biases the coordinate with the smallest accumulated movement
// (per-step sum of squares, or final displacement). Ties go to the smallest
// index. Uses nothing from the audited runs.
CraftedGradient CraftSimulatedDim(const TrainConfig& cfg, const Dataset& data,
                                  const BatchSchedule& schedule,
                                  const MlpModel& theta_0,
                                  const SimStrategy& strategy, Rng& rng);

// C times a uniformly random unit vector.
CraftedGradient CraftRandomDirection(int64_t p, double c, Rng& rng);

// theta_T[d] - theta_0[d].
double ScoreDim(const Eigen::VectorXd& theta_T, const Eigen::VectorXd& theta_0,
                int64_t d);

// Cosine between the crafted gradient and theta_T - theta_0; 0 when the
// model did not move.
double ScoreCosine(const Eigen::VectorXd& theta_T,
                   const Eigen::VectorXd& theta_0,
                   const CraftedGradient& crafted);

// A uniformly chosen training point with its label flipped.
Canary MakeLossCanary(const Dataset& data, Rng& rng);

// Loss of the final model on the canary; lower means more confident that the
// canary was trained on.
double ScoreLoss(const MlpModel& model_T, const Canary& canary);

// Everything the adversary is allowed to know before training starts.
struct AdversaryContext {
  const TrainConfig& cfg;
  const Dataset& data;
  const BatchSchedule& schedule;
  const MlpModel& theta_0;
};

// An adversary whose insertion has been fixed offline. Scoring sees only the
// endpoints of a training run.
class Adversary {
 public:
  virtual ~Adversary() = default;

  virtual AdversaryKind kind() const = 0;
  virtual const Insertion& insertion() const = 0;
  virtual double Score(const EndpointParams& endpoints) const = 0;
};

std::unique_ptr<Adversary> PrepareAdversary(const AdversarySpec& spec,
                                            const AdversaryContext& context,
                                            Rng& rng);

}  // namespace dpaudit

#endif  // DPAUDIT_ADVERSARIES_H_

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

#include "dpaudit/adversaries.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace dpaudit {
namespace {

CraftedGradient OneHot(int64_t p, int64_t d, double c, CraftedKind kind) {
  CraftedGradient g;
  g.vector = Eigen::VectorXd::Zero(p);
  g.vector[d] = c;
  g.biased_dim = d;
  g.kind = kind;
  return g;
}

class DimAdversary : public Adversary {
 public:
  DimAdversary(AdversaryKind kind, CraftedGradient crafted)
      : kind_(kind), insertion_(std::move(crafted)) {}

  AdversaryKind kind() const override { return kind_; }
  const Insertion& insertion() const override { return insertion_; }
  double Score(const EndpointParams& endpoints) const override {
    return ScoreDim(endpoints.final_params, endpoints.initial,
                    *std::get<CraftedGradient>(insertion_).biased_dim);
  }

 private:
  AdversaryKind kind_;
  Insertion insertion_;
};

class CosineAdversary : public Adversary {
 public:
  explicit CosineAdversary(CraftedGradient crafted)
      : insertion_(std::move(crafted)) {}

  AdversaryKind kind() const override {
    return AdversaryKind::kRandomDirection;
  }
  const Insertion& insertion() const override { return insertion_; }
  double Score(const EndpointParams& endpoints) const override {
    return ScoreCosine(endpoints.final_params, endpoints.initial,
                       std::get<CraftedGradient>(insertion_));
  }

 private:
  Insertion insertion_;
};

class LossAdversary : public Adversary {
 public:
  LossAdversary(MlpArchitecture arch, Canary canary)
      : arch_(std::move(arch)), insertion_(std::move(canary)) {}

  AdversaryKind kind() const override { return AdversaryKind::kLoss; }
  const Insertion& insertion() const override { return insertion_; }
  double Score(const EndpointParams& endpoints) const override {
    return ScoreLoss(MlpModel(arch_, endpoints.final_params),
                     std::get<Canary>(insertion_));
  }

 private:
  MlpArchitecture arch_;
  Insertion insertion_;
};

}  // namespace

std::string AdversaryName(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::kRandomDim:
      return "gc-r";
    case AdversaryKind::kSimulatedDim:
      return "gc-s";
    case AdversaryKind::kRandomDirection:
      return "cots";
    case AdversaryKind::kLoss:
      return "loss";
  }
  return "unknown";
}

AdversaryKind ParseAdversaryKind(const std::string& name) {
  for (AdversaryKind kind :
       {AdversaryKind::kRandomDim, AdversaryKind::kSimulatedDim,
        AdversaryKind::kRandomDirection, AdversaryKind::kLoss}) {
    if (AdversaryName(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown adversary '" + name +
                              "' (expected gc-r, gc-s, cots or loss)");
}

CraftedGradient CraftRandomDim(int64_t p, double c, Rng& rng) {
  if (p < 1 || !(c > 0.0)) {
    throw std::domain_error("CraftRandomDim: need p >= 1 and c > 0");
  }
  std::uniform_int_distribution<int64_t> pick(0, p - 1);
  return OneHot(p, pick(rng), c, CraftedKind::kRandomDim);
}

CraftedGradient CraftSimulatedDim(const TrainConfig& cfg, const Dataset& data,
                                  const BatchSchedule& schedule,
                                  const MlpModel& theta_0,
                                  const SimStrategy& strategy, Rng& rng) {
  if (strategy.sim_runs < 1) {
    throw std::domain_error("CraftSimulatedDim: sim_runs must be >= 1");
  }
  if (static_cast<int64_t>(schedule.batches.size()) < cfg.steps) {
    throw std::domain_error("CraftSimulatedDim: schedule too short");
  }
  const bool noisy = strategy.simulation == SimStrategy::Simulation::kNoisy;
  const bool per_step = strategy.rank == SimStrategy::Rank::kPerStep;
  // The noiseless simulation trains without noise and without clipping.
  const double clip =
      noisy ? cfg.clip_c : std::numeric_limits<double>::infinity();
  const double step = cfg.eta / static_cast<double>(cfg.batch_size);

  Eigen::VectorXd movement = Eigen::VectorXd::Zero(theta_0.size());
  GradientWorkspace grad_ws;
  Eigen::MatrixXd bx;
  Eigen::VectorXd by;
  Eigen::VectorXd grad_sum;
  Eigen::VectorXd noise(theta_0.size());
  NormalSampler normal;
  for (int run = 0; run < strategy.sim_runs; ++run) {
    MlpModel model = theta_0;
    for (int64_t t = 0; t < cfg.steps; ++t) {
      GatherBatch(data, schedule.batches[t], bx, by);
      ClippedGradientSum(model, bx, by, clip, grad_sum, grad_ws);
      Eigen::VectorXd update = -step * grad_sum;
      if (noisy) {
        normal.Fill(rng, {noise.data(), static_cast<size_t>(noise.size())},
                    cfg.sigma * cfg.clip_c);
        update += step * noise;
      }
      model.mutable_params() += update;
      if (per_step) movement += update.cwiseAbs2();
    }
    if (!per_step) {
      movement += (model.params() - theta_0.params()).cwiseAbs();
    }
  }
  if (!movement.allFinite()) {
    throw TrainingDivergence("simulated training diverged");
  }
  // sqrt is monotone, so the argmin of the accumulated squares is the argmin
  // of the per-step norms. min_element returns the first (smallest) index.
  const int64_t d =
      std::min_element(movement.data(), movement.data() + movement.size()) -
      movement.data();
  return OneHot(theta_0.size(), d, cfg.clip_c, CraftedKind::kSimulatedDim);
}

CraftedGradient CraftRandomDirection(int64_t p, double c, Rng& rng) {
  if (p < 1 || !(c > 0.0)) {
    throw std::domain_error("CraftRandomDirection: need p >= 1 and c > 0");
  }
  NormalSampler normal;
  Eigen::VectorXd v(p);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Eigen::Index i = 0; i < p; ++i) v[i] = normal(rng);
    norm = v.norm();
  }
  CraftedGradient g;
  g.vector = v * (c / norm);
  g.kind = CraftedKind::kRandomDirection;
  return g;
}

double ScoreDim(const Eigen::VectorXd& theta_T, const Eigen::VectorXd& theta_0,
                int64_t d) {
  if (theta_T.size() != theta_0.size() || d < 0 || d >= theta_0.size()) {
    throw std::out_of_range("ScoreDim: dimension out of range");
  }
  return theta_T[d] - theta_0[d];
}

double ScoreCosine(const Eigen::VectorXd& theta_T,
                   const Eigen::VectorXd& theta_0,
                   const CraftedGradient& crafted) {
  if (theta_T.size() != theta_0.size() ||
      crafted.vector.size() != theta_0.size()) {
    throw std::domain_error("ScoreCosine: length mismatch");
  }
  const Eigen::VectorXd update = theta_T - theta_0;
  const double denom = update.norm() * crafted.vector.norm();
  if (denom == 0.0) return 0.0;
  return crafted.vector.dot(update) / denom;
}

Canary MakeLossCanary(const Dataset& data, Rng& rng) {
  if (data.size() < 1) throw std::domain_error("MakeLossCanary: empty data");
  std::uniform_int_distribution<int64_t> pick(0, data.size() - 1);
  const int64_t i = pick(rng);
  Canary canary;
  canary.features = data.features.row(i).transpose();
  canary.flipped_label = 1.0 - data.targets[i];
  canary.source_index = i;
  return canary;
}

double ScoreLoss(const MlpModel& model_T, const Canary& canary) {
  const Eigen::MatrixXd x = canary.features.transpose();
  const double logit = model_T.Logits(x)[0];
  return BceWithLogits(logit, canary.flipped_label);
}

std::unique_ptr<Adversary> PrepareAdversary(const AdversarySpec& spec,
                                            const AdversaryContext& context,
                                            Rng& rng) {
  const int64_t p = context.theta_0.size();
  const double c = context.cfg.clip_c;
  switch (spec.kind) {
    case AdversaryKind::kRandomDim:
      return std::make_unique<DimAdversary>(spec.kind,
                                            CraftRandomDim(p, c, rng));
    case AdversaryKind::kSimulatedDim:
      return std::make_unique<DimAdversary>(
          spec.kind,
          CraftSimulatedDim(context.cfg, context.data, context.schedule,
                            context.theta_0, spec.strategy, rng));
    case AdversaryKind::kRandomDirection:
      return std::make_unique<CosineAdversary>(CraftRandomDirection(p, c, rng));
    case AdversaryKind::kLoss:
      return std::make_unique<LossAdversary>(
          context.theta_0.architecture(), MakeLossCanary(context.data, rng));
  }
  throw std::invalid_argument("unsupported adversary");
}

}  // namespace dpaudit

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
#include <stdexcept>
#include <string>

namespace dpaudit {
namespace {

void Require(bool ok, const char* field, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(std::string("train.") + field + ": " + what);
  }
}

}  // namespace

void ValidateTrainConfig(const TrainConfig& cfg) {
  Require(cfg.eta > 0.0 && std::isfinite(cfg.eta), "eta", "must be positive");
  Require(cfg.clip_c > 0.0, "clip_c", "must be positive");
  Require(cfg.sigma > 0.0, "sigma", "must be positive");
  Require(cfg.steps >= 1, "steps", "must be >= 1");
  Require(cfg.periodicity >= 1, "periodicity", "must be >= 1");
  Require(cfg.batch_size >= 1, "batch_size", "must be >= 1");
  Require(cfg.runs >= 1, "runs", "must be >= 1");
  Require(cfg.delta > 0.0 && cfg.delta < 1.0, "delta", "must be in (0, 1)");
  Require(cfg.confidence > 0.0 && cfg.confidence < 1.0, "confidence",
          "must be in (0, 1)");
}

Eigen::VectorXd Clip(const Eigen::VectorXd& g, double c) {
  if (!(c > 0.0)) throw std::domain_error("Clip: threshold must be positive");
  const double norm = g.norm();
  if (norm <= c) return g;
  return g * (c / norm);
}

double DpsgdStepInPlace(MlpModel& model, const Dataset& data,
                        const std::vector<int64_t>& batch,
                        const TrainConfig& cfg, const Insertion& insert,
                        Rng& noise_rng, StepWorkspace& ws) {
  GatherBatch(data, batch, ws.batch_x, ws.batch_y);
  if (const Canary* canary = std::get_if<Canary>(&insert)) {
    const Eigen::Index b = ws.batch_x.rows();
    ws.batch_x.conservativeResize(b + 1, Eigen::NoChange);
    ws.batch_x.row(b) = canary->features.transpose();
    ws.batch_y.conservativeResize(b + 1);
    ws.batch_y[b] = canary->flipped_label;
  }
  const ClippedSumStats stats = ClippedGradientSum(
      model, ws.batch_x, ws.batch_y, cfg.clip_c, ws.grad_sum, ws.grad);

  ws.noise.resize(model.size());
  ws.normal.Fill(noise_rng, {ws.noise.data(), static_cast<size_t>(ws.noise.size())},
                 cfg.sigma * cfg.clip_c);
  ws.grad_sum += ws.noise;
  if (const CraftedGradient* crafted = std::get_if<CraftedGradient>(&insert)) {
    if (crafted->biased_dim) {
      ws.grad_sum[*crafted->biased_dim] += crafted->vector[*crafted->biased_dim];
    } else {
      ws.grad_sum += crafted->vector;
    }
  }
  const double step = cfg.eta / static_cast<double>(cfg.batch_size);
  model.mutable_params().noalias() -= step * ws.grad_sum;
  if (!model.params().allFinite()) {
    throw TrainingDivergence("non-finite parameters after DP-SGD step");
  }
  return stats.max_clipped_norm;
}

MlpModel DpsgdStep(const MlpModel& model, const Dataset& data,
                   const std::vector<int64_t>& batch, const TrainConfig& cfg,
                   const Insertion& insert, Rng& noise_rng) {
  MlpModel next = model;
  StepWorkspace ws;
  DpsgdStepInPlace(next, data, batch, cfg, insert, noise_rng, ws);
  return next;
}

int64_t InsertionCount(int64_t steps, int64_t periodicity) {
  if (steps < 0 || periodicity < 1) {
    throw std::domain_error("InsertionCount: need steps >= 0, k >= 1");
  }
  return steps / periodicity;
}

EndpointParams Train(const TrainConfig& cfg, const Dataset& data,
                     const BatchSchedule& schedule, const MlpModel& init,
                     const Insertion& insertion, int insertion_bit,
                     Rng& noise_rng) {
  if (static_cast<int64_t>(schedule.batches.size()) < cfg.steps) {
    throw std::domain_error("Train: schedule shorter than the step count");
  }
  if (const CraftedGradient* crafted = std::get_if<CraftedGradient>(&insertion);
      crafted && crafted->vector.size() != init.size()) {
    throw std::domain_error("Train: crafted gradient has the wrong length");
  }
  static const Insertion kNothing;
  MlpModel model = init;
  StepWorkspace ws;
  for (int64_t t = 1; t <= cfg.steps; ++t) {
    const bool insert_now = insertion_bit == 0 && t % cfg.periodicity == 0;
    const double clipped_norm =
        DpsgdStepInPlace(model, data, schedule.batches[t - 1], cfg,
                         insert_now ? insertion : kNothing, noise_rng, ws);
    if (clipped_norm > cfg.clip_c * (1.0 + 1e-12)) {
      throw std::logic_error("clipped per-example norm exceeds C");
    }
  }
  return EndpointParams{init.params(), model.params()};
}

}  // namespace dpaudit

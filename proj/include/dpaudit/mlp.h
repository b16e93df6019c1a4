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

#ifndef DPAUDIT_MLP_H_
#define DPAUDIT_MLP_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpaudit/random.h"

namespace dpaudit {

enum class Activation { kTanh, kRelu };

std::string ActivationName(Activation act);
Activation ParseActivation(const std::string& name);

// Fully connected network widths[0] -> ... -> widths.back() == 1. Hidden
// layers use `hidden`; the single output is a logit fed to a sigmoid inside
// the binary cross-entropy loss.
struct MlpArchitecture {
  std::vector<int64_t> widths;
  Activation hidden = Activation::kTanh;

  int64_t num_layers() const {
    return static_cast<int64_t>(widths.size()) - 1;
  }
  int64_t ParameterCount() const;
  // Offset of layer l's weight block in the flat parameter vector; the
  // weight block (in x out, column-major) is followed by the out biases.
  int64_t WeightOffset(int64_t layer) const;
  int64_t BiasOffset(int64_t layer) const;
};

void ValidateArchitecture(const MlpArchitecture& arch);

// 8 -> 6 (tanh) -> 1, 61 parameters.
MlpArchitecture HousingArchitecture();
// 32 -> 64 -> 32 -> 1 (tanh), 4225 parameters.
MlpArchitecture OverparameterizedArchitecture();

// Non-finite loss or activations.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters live in one flat vector; layer matrices are views into it, so
// flattening is the identity.
class MlpModel {
 public:
  explicit MlpModel(MlpArchitecture arch);
  MlpModel(MlpArchitecture arch, Eigen::VectorXd params);

  // Glorot-uniform weights, zero biases.
  static MlpModel GlorotInit(MlpArchitecture arch, Rng& rng);

  const MlpArchitecture& architecture() const { return arch_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& mutable_params() { return params_; }
  int64_t size() const { return params_.size(); }

  Eigen::Map<const Eigen::MatrixXd> weights(int64_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int64_t layer) const;

  // Output logits for each row of `features`.
  Eigen::VectorXd Logits(const Eigen::MatrixXd& features) const;

 private:
  MlpArchitecture arch_;
  Eigen::VectorXd params_;
};

// Per-example binary cross-entropy with logits.
double BceWithLogits(double logit, double target);

// Mean loss over the rows.
double MeanLoss(const MlpModel& model, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& targets);

struct LossAndGradients {
  double loss = 0.0;
  // Row i is the gradient of example i's loss, in flat parameter layout.
  Eigen::MatrixXd per_example;
};

// Explicit per-example gradients by backpropagation. Throws
// TrainingDivergence on non-finite values.
LossAndGradients LossAndGrad(const MlpModel& model,
                             const Eigen::MatrixXd& features,
                             const Eigen::VectorXd& targets);

// Reusable buffers for ClippedGradientSum.
struct GradientWorkspace {
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> deltas;
  Eigen::VectorXd sq_norms;
  Eigen::VectorXd scales;
};

struct ClippedSumStats {
  double mean_loss = 0.0;
  // Largest per-example norm before and after clipping.
  double max_norm = 0.0;
  double max_clipped_norm = 0.0;
};

// Writes sum_i clip(grad_i, clip_c) into `sum` without materialising the
// per-example gradients: for a dense layer the example gradient is an outer
// product, so its squared norm is |delta|^2 (|a|^2 + 1) summed over layers,
// and the clipped sum is a single rescaled matrix product. Pass
// clip_c = +inf to disable clipping.
ClippedSumStats ClippedGradientSum(const MlpModel& model,
                                   const Eigen::MatrixXd& features,
                                   const Eigen::VectorXd& targets,
                                   double clip_c, Eigen::VectorXd& sum,
                                   GradientWorkspace& ws);

}  // namespace dpaudit

#endif  // DPAUDIT_MLP_H_

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

#include "dpaudit/mlp.h"

#include <cmath>
#include <limits>
#include <utility>

namespace dpaudit {
namespace {

// tanh through exp, which Eigen vectorises for doubles (tanh it does not).
template <typename Derived>
void TanhInPlace(Eigen::MatrixBase<Derived>& m) {
  m = (1.0 - 2.0 / ((2.0 * m.array()).exp() + 1.0)).matrix();
}

void ApplyActivation(Activation act, Eigen::MatrixXd& m) {
  switch (act) {
    case Activation::kTanh:
      TanhInPlace(m);
      return;
    case Activation::kRelu:
      m = m.cwiseMax(0.0);
      return;
  }
}

// Derivative expressed through the activation output h.
void MultiplyByDerivative(Activation act, const Eigen::MatrixXd& h,
                          Eigen::MatrixXd& delta) {
  switch (act) {
    case Activation::kTanh:
      delta.array() *= 1.0 - h.array().square();
      return;
    case Activation::kRelu:
      delta.array() *= (h.array() > 0.0).cast<double>();
      return;
  }
}

double Sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

const Eigen::MatrixXd& LayerInput(const Eigen::MatrixXd& features,
                                  const GradientWorkspace& ws, int64_t layer) {
  return layer == 0 ? features : ws.activations[layer];
}

// Forward pass followed by backpropagation of the per-example output
// gradients. On return ws.activations[l] (l >= 1) is the input of layer l
// and ws.deltas[l] holds d loss_i / d preactivation_l row-wise.
double ForwardBackward(const MlpModel& model, const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& targets, GradientWorkspace& ws) {
  const MlpArchitecture& arch = model.architecture();
  const int64_t num_layers = arch.num_layers();
  if (features.rows() == 0 || features.rows() != targets.size()) {
    throw std::domain_error("batch must be non-empty with matching targets");
  }
  if (features.cols() != arch.widths.front()) {
    throw std::domain_error("batch feature width does not match the model");
  }
  ws.activations.resize(num_layers);
  ws.deltas.resize(num_layers);

  for (int64_t l = 0; l < num_layers; ++l) {
    const Eigen::MatrixXd& in = LayerInput(features, ws, l);
    Eigen::MatrixXd& out = l + 1 < num_layers ? ws.activations[l + 1]
                                              : ws.deltas[num_layers - 1];
    out.noalias() = in * model.weights(l);
    out.rowwise() += model.bias(l).transpose();
    if (l + 1 < num_layers) ApplyActivation(arch.hidden, out);
  }

  Eigen::MatrixXd& top = ws.deltas[num_layers - 1];
  double loss = 0.0;
  for (Eigen::Index i = 0; i < top.rows(); ++i) {
    const double z = top(i, 0);
    loss += BceWithLogits(z, targets[i]);
    top(i, 0) = Sigmoid(z) - targets[i];
  }
  loss /= static_cast<double>(top.rows());
  if (!std::isfinite(loss)) {
    throw TrainingDivergence("non-finite loss in forward pass");
  }

  for (int64_t l = num_layers - 1; l >= 1; --l) {
    ws.deltas[l - 1].noalias() = ws.deltas[l] * model.weights(l).transpose();
    MultiplyByDerivative(arch.hidden, ws.activations[l], ws.deltas[l - 1]);
  }
  return loss;
}

}  // namespace

std::string ActivationName(Activation act) {
  return act == Activation::kTanh ? "tanh" : "relu";
}

Activation ParseActivation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

int64_t MlpArchitecture::ParameterCount() const {
  int64_t p = 0;
  for (int64_t l = 0; l < num_layers(); ++l) {
    p += widths[l] * widths[l + 1] + widths[l + 1];
  }
  return p;
}

int64_t MlpArchitecture::WeightOffset(int64_t layer) const {
  int64_t offset = 0;
  for (int64_t l = 0; l < layer; ++l) {
    offset += widths[l] * widths[l + 1] + widths[l + 1];
  }
  return offset;
}

int64_t MlpArchitecture::BiasOffset(int64_t layer) const {
  return WeightOffset(layer) + widths[layer] * widths[layer + 1];
}

void ValidateArchitecture(const MlpArchitecture& arch) {
  if (arch.widths.size() < 2) {
    throw std::domain_error("architecture needs at least one layer");
  }
  for (int64_t w : arch.widths) {
    if (w < 1) throw std::domain_error("layer widths must be positive");
  }
  if (arch.widths.back() != 1) {
    throw std::domain_error("binary classifier must have a single output");
  }
}

MlpArchitecture HousingArchitecture() { return {{8, 6, 1}, Activation::kTanh}; }

MlpArchitecture OverparameterizedArchitecture() {
  return {{32, 64, 32, 1}, Activation::kTanh};
}

MlpModel::MlpModel(MlpArchitecture arch)
    : MlpModel(arch, Eigen::VectorXd::Zero(arch.ParameterCount())) {}

MlpModel::MlpModel(MlpArchitecture arch, Eigen::VectorXd params)
    : arch_(std::move(arch)), params_(std::move(params)) {
  ValidateArchitecture(arch_);
  if (params_.size() != arch_.ParameterCount()) {
    throw std::domain_error("parameter vector length does not match "
                            "architecture");
  }
}

MlpModel MlpModel::GlorotInit(MlpArchitecture arch, Rng& rng) {
  MlpModel model(std::move(arch));
  const MlpArchitecture& a = model.architecture();
  for (int64_t l = 0; l < a.num_layers(); ++l) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(a.widths[l] + a.widths[l + 1]));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    const int64_t begin = a.WeightOffset(l);
    const int64_t end = a.BiasOffset(l);
    for (int64_t k = begin; k < end; ++k) model.params_[k] = uniform(rng);
  }
  return model;
}

Eigen::Map<const Eigen::MatrixXd> MlpModel::weights(int64_t layer) const {
  return {params_.data() + arch_.WeightOffset(layer), arch_.widths[layer],
          arch_.widths[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> MlpModel::bias(int64_t layer) const {
  return {params_.data() + arch_.BiasOffset(layer), arch_.widths[layer + 1]};
}

Eigen::VectorXd MlpModel::Logits(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd h = features;
  for (int64_t l = 0; l < arch_.num_layers(); ++l) {
    Eigen::MatrixXd z = h * weights(l);
    z.rowwise() += bias(l).transpose();
    if (l + 1 < arch_.num_layers()) ApplyActivation(arch_.hidden, z);
    h = std::move(z);
  }
  return h.col(0);
}

double BceWithLogits(double logit, double target) {
  // softplus(z) - y z, written to stay finite for large |z|.
  const double softplus =
      std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  return softplus - target * logit;
}

double MeanLoss(const MlpModel& model, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& targets) {
  const Eigen::VectorXd z = model.Logits(features);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += BceWithLogits(z[i], targets[i]);
  }
  return loss / static_cast<double>(z.size());
}

LossAndGradients LossAndGrad(const MlpModel& model,
                             const Eigen::MatrixXd& features,
                             const Eigen::VectorXd& targets) {
  GradientWorkspace ws;
  LossAndGradients out;
  out.loss = ForwardBackward(model, features, targets, ws);
  const MlpArchitecture& arch = model.architecture();
  const Eigen::Index batch = features.rows();
  out.per_example.resize(batch, model.size());
  for (int64_t l = 0; l < arch.num_layers(); ++l) {
    const Eigen::MatrixXd& in = LayerInput(features, ws, l);
    const Eigen::MatrixXd& delta = ws.deltas[l];
    const int64_t w_off = arch.WeightOffset(l);
    const int64_t b_off = arch.BiasOffset(l);
    const int64_t fan_in = arch.widths[l];
    for (Eigen::Index i = 0; i < batch; ++i) {
      for (Eigen::Index c = 0; c < delta.cols(); ++c) {
        for (Eigen::Index r = 0; r < fan_in; ++r) {
          out.per_example(i, w_off + r + fan_in * c) = in(i, r) * delta(i, c);
        }
        out.per_example(i, b_off + c) = delta(i, c);
      }
    }
  }
  if (!out.per_example.allFinite()) {
    throw TrainingDivergence("non-finite per-example gradient");
  }
  return out;
}

ClippedSumStats ClippedGradientSum(const MlpModel& model,
                                   const Eigen::MatrixXd& features,
                                   const Eigen::VectorXd& targets,
                                   double clip_c, Eigen::VectorXd& sum,
                                   GradientWorkspace& ws) {
  if (!(clip_c > 0.0)) {
    throw std::domain_error("clipping threshold must be positive");
  }
  ClippedSumStats stats;
  stats.mean_loss = ForwardBackward(model, features, targets, ws);
  const MlpArchitecture& arch = model.architecture();
  const int64_t num_layers = arch.num_layers();

  ws.sq_norms.setZero(features.rows());
  for (int64_t l = 0; l < num_layers; ++l) {
    const Eigen::MatrixXd& in = LayerInput(features, ws, l);
    ws.sq_norms.array() += ws.deltas[l].rowwise().squaredNorm().array() *
                           (in.rowwise().squaredNorm().array() + 1.0);
  }
  ws.scales.resize(features.rows());
  for (Eigen::Index i = 0; i < ws.sq_norms.size(); ++i) {
    const double norm = std::sqrt(ws.sq_norms[i]);
    const double scale = norm > clip_c ? clip_c / norm : 1.0;
    ws.scales[i] = scale;
    stats.max_norm = std::max(stats.max_norm, norm);
    stats.max_clipped_norm = std::max(stats.max_clipped_norm, norm * scale);
  }

  sum.resize(model.size());
  for (int64_t l = 0; l < num_layers; ++l) {
    const Eigen::MatrixXd& in = LayerInput(features, ws, l);
    Eigen::MatrixXd& delta = ws.deltas[l];
    delta = ws.scales.asDiagonal() * delta;
    Eigen::Map<Eigen::MatrixXd> grad_w(sum.data() + arch.WeightOffset(l),
                                       arch.widths[l], arch.widths[l + 1]);
    grad_w.noalias() = in.transpose() * delta;
    Eigen::Map<Eigen::VectorXd>(sum.data() + arch.BiasOffset(l),
                                arch.widths[l + 1]) =
        delta.colwise().sum().transpose();
  }
  if (!sum.allFinite()) {
    throw TrainingDivergence("non-finite clipped gradient sum");
  }
  return stats;
}

}  // namespace dpaudit

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

// One-dimensional model of hidden-state DP-SGD under a crafted loss
// landscape. The parameter follows
//
//   theta_1     = Z_1            (no canary)   or   C + Z_1   (canary)
//   theta_{t+1} = theta_t + (g(theta_t) + Z_{t+1}) / B
//
// with Z ~ N(0, C^2 sigma^2) and a drift g bounded by BC, standing in for
// the clipped gradient sum of a batch of B examples. The drift enters with
// the same sign as the first-step insertion, so the worst-case landscape
// pushes each arm further to its own side of the threshold.

#ifndef DPAUDIT_HIDDEN_STATE_SIM_H_
#define DPAUDIT_HIDDEN_STATE_SIM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dpaudit/random.h"
#include "dpaudit/stats.h"

namespace dpaudit {

struct SimConfig {
  int64_t steps = 25;
  int64_t batch_b = 1;
  double clip_c = 1.0;
  double sigma = 1.0;
  int64_t runs = 5000;
  double delta = 1e-5;
  double confidence = 0.95;
  uint64_t seed = 0;
  int jobs = 0;
};

// Throws std::invalid_argument naming the offending field.
void ValidateSimConfig(const SimConfig& cfg);

// BC if x > h, else -BC.
double GWorstCase(double x, int64_t b, double c, double h);

// The threshold of the worst-case landscape: C/2.
double OptimalThreshold(double c);

class DriftFunction {
 public:
  enum class Kind { kWorstCase, kConstant };

  static DriftFunction WorstCase(double h) { return {Kind::kWorstCase, h}; }
  static DriftFunction Constant(double value) {
    return {Kind::kConstant, value};
  }

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }

  // Throws std::domain_error if a constant drift exceeds BC in magnitude.
  double operator()(double x, int64_t b, double c) const;

 private:
  DriftFunction(Kind kind, double parameter)
      : kind_(kind), parameter_(parameter) {}

  Kind kind_;
  double parameter_;
};

struct SimTrajectory {
  std::vector<double> theta;  // theta_1 .. theta_T
  bool with_canary = false;
};

SimTrajectory SimulatePair(const SimConfig& cfg, const DriftFunction& g,
                           Rng& rng, bool with_canary);

struct SimCurve {
  std::vector<AuditReport> reports;  // one per step t = 1..T
  double eps_theory = 0.0;           // a single Gaussian insertion

  std::vector<double> eps_hat() const;
};

// R runs with Bernoulli(1/2) canary bits; eps_hat(t) audits the raw theta_t
// values. Run i always uses the same bit and noise stream, so curves for
// different drift functions share their randomness.
SimCurve AuditSim(const SimConfig& cfg, const DriftFunction& g);

// Last entry over first. Throws std::domain_error if the first is not
// positive or the series is shorter than 2.
double AmplificationRate(std::span<const double> eps_series);

struct AmpCell {
  int64_t batch_b = 1;
  double sigma = 1.0;
  double ratio = 0.0;  // NaN when eps_hat(1) is 0
};

// Worst-case-landscape amplification ratio on every (B, sigma) pair, with
// the other fields taken from `base`.
std::vector<AmpCell> AmpGrid(const SimConfig& base,
                             std::span<const int64_t> batch_sizes,
                             std::span<const double> sigmas);

struct ThresholdSearchResult {
  std::vector<double> alphas;
  std::vector<double> thresholds;
  std::vector<double> eps_hat;
  size_t best_index = 0;
  size_t nearest_index = 0;  // grid point closest to C/2
  double best_eps = 0.0;
  double best_h = 0.0;
  // The same runs audited with the threshold exactly at C/2.
  double h_star_eps = 0.0;
  // True when the best threshold is within one grid cell of C/2.
  bool optimal_within_grid = false;
};

// Brute force over d worst-case landscapes at T = 2 (cfg.steps is ignored).
// Thresholds are noise quantiles h_i = C sigma Phi^{-1}(1 - alpha_i) with
// alpha_i = linspace(0, Phi(C / (2 sigma^2)), d). Every grid point reuses
// the same runs.
ThresholdSearchResult ThresholdSearch(const SimConfig& cfg, int d);

// sim_curve.csv: t,eps_hat,eps_theory.
void WriteSimCurveCsv(const std::filesystem::path& path, const SimCurve& curve);
// amp_grid.csv: B,sigma,ratio.
void WriteAmpGridCsv(const std::filesystem::path& path,
                     const std::vector<AmpCell>& cells);
// threshold_search.csv: alpha,h,eps_hat.
void WriteThresholdSearchCsv(const std::filesystem::path& path,
                             const ThresholdSearchResult& result);

}  // namespace dpaudit

#endif  // DPAUDIT_HIDDEN_STATE_SIM_H_

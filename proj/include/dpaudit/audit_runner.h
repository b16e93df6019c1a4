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

#ifndef DPAUDIT_AUDIT_RUNNER_H_
#define DPAUDIT_AUDIT_RUNNER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpaudit/adversaries.h"
#include "dpaudit/dataset.h"
#include "dpaudit/dpsgd.h"
#include "dpaudit/mlp.h"
#include "dpaudit/stats.h"

namespace dpaudit {

// Either a CSV file or a synthetic dataset drawn from (seed, n, d).
struct DatasetSpec {
  std::string csv_path;
  uint64_t seed = 1;
  int64_t n = 400;
  int64_t d = 8;
};

struct ExperimentSpec {
  TrainConfig train;
  AdversarySpec adversary;
  DatasetSpec dataset;
  MlpArchitecture architecture = HousingArchitecture();
  std::string output_dir;
  int jobs = 0;
};

// Throws std::invalid_argument naming the offending field.
void ValidateExperimentSpec(const ExperimentSpec& spec);

// Full-batch training of the 8 -> 6 -> 1 network on 400 points:
// T = 250, k = 1, sigma = 4, C = 1, R = 5000, delta = 1e-5.
ExperimentSpec HousingAnalogSpec();

// 32 -> 64 -> 32 -> 1 network, batch 128 out of 1280 points, same privacy
// parameters as the housing analog.
ExperimentSpec OverparameterizedSpec();

struct AuditResult {
  AuditReport report;
  // Per run, in run-index order. bits[i] == 0 means the insertion happened.
  std::vector<int> bits;
  std::vector<double> scores;
  int64_t failed_runs = 0;
  int64_t insertions = 0;
  AdversaryKind adversary = AdversaryKind::kSimulatedDim;
  std::optional<int64_t> biased_dim;

  std::vector<ScoreRecord> records() const;
};

// Loads or generates the dataset described by `spec`.
Dataset ResolveDataset(const DatasetSpec& spec);

// Accountant bound for the insertions a config performs.
double TheoreticalEpsilon(const TrainConfig& cfg);

// R training runs with Bernoulli(1/2) insertion bits, adversary scoring on
// the endpoints only, then the GDP audit of the scores. Deterministic in the
// spec (including its seed) and independent of `jobs`.
AuditResult RunAudit(const ExperimentSpec& spec);

// delta(eps) of a mu-GDP mechanism on every grid point.
std::vector<std::pair<double, double>> PrivacyProfile(
    GdpMu mu_hat, std::span<const double> eps_grid);

// report.csv and scores.csv (run_index,bit,score) in `dir`.
void WriteAuditOutputs(const std::filesystem::path& dir,
                       const AuditResult& result);
// profile.csv (eps,delta).
void WriteProfileCsv(const std::filesystem::path& path,
                     const std::vector<std::pair<double, double>>& profile);

}  // namespace dpaudit

#endif  // DPAUDIT_AUDIT_RUNNER_H_

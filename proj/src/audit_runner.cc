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

#include "dpaudit/audit_runner.h"

#include <atomic>
#include <stdexcept>
#include <string>

#include "dpaudit/csv.h"
#include "dpaudit/parallel.h"
#include "dpaudit/random.h"

namespace dpaudit {
namespace {

// A run whose training diverges is retried with fresh noise this many times.
constexpr int kMaxAttempts = 5;
constexpr int64_t kMinRuns = 10;

void Require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

}  // namespace

std::vector<ScoreRecord> AuditResult::records() const {
  std::vector<ScoreRecord> out;
  out.reserve(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    out.push_back({scores[i], bits[i] == 0});
  }
  return out;
}

void ValidateExperimentSpec(const ExperimentSpec& spec) {
  ValidateTrainConfig(spec.train);
  Require(spec.train.runs >= kMinRuns, "train.runs", "must be >= 10");
  ValidateArchitecture(spec.architecture);
  if (spec.dataset.csv_path.empty()) {
    Require(spec.dataset.n >= 1, "dataset.n", "must be >= 1");
    Require(spec.dataset.d == spec.architecture.widths.front(), "dataset.d",
            "must equal the model input width " +
                std::to_string(spec.architecture.widths.front()));
    Require(spec.train.batch_size <= spec.dataset.n, "train.batch_size",
            "exceeds dataset.n");
  }
  Require(spec.jobs >= 0, "jobs", "must be >= 0");
}

ExperimentSpec HousingAnalogSpec() {
  ExperimentSpec spec;
  spec.train.eta = 0.1;
  spec.train.clip_c = 1.0;
  spec.train.sigma = 4.0;
  spec.train.steps = 250;
  spec.train.periodicity = 1;
  spec.train.batch_size = 400;
  spec.train.runs = 5000;
  spec.train.delta = 1e-5;
  spec.train.confidence = 0.95;
  spec.adversary.kind = AdversaryKind::kSimulatedDim;
  spec.dataset = {"", 1, 400, 8};
  spec.architecture = HousingArchitecture();
  return spec;
}

ExperimentSpec OverparameterizedSpec() {
  ExperimentSpec spec;
  spec.train.eta = 0.01;
  spec.train.clip_c = 1.0;
  spec.train.sigma = 4.0;
  spec.train.steps = 250;
  spec.train.periodicity = 1;
  spec.train.batch_size = 128;
  spec.train.runs = 5000;
  spec.train.delta = 1e-5;
  spec.train.confidence = 0.95;
  spec.adversary.kind = AdversaryKind::kRandomDim;
  spec.dataset = {"", 1, 1280, 32};
  spec.architecture = OverparameterizedArchitecture();
  return spec;
}

Dataset ResolveDataset(const DatasetSpec& spec) {
  if (!spec.csv_path.empty()) return LoadDatasetCsv(spec.csv_path);
  return MakeDataset(spec.seed, spec.n, spec.d);
}

double TheoreticalEpsilon(const TrainConfig& cfg) {
  const GdpMu mu = ComposeGaussianGdp(
      InsertionCount(cfg.steps, cfg.periodicity), cfg.sigma);
  return GdpToEps(mu, cfg.delta);
}

AuditResult RunAudit(const ExperimentSpec& spec) {
  ValidateExperimentSpec(spec);
  const TrainConfig& cfg = spec.train;
  const Dataset data = ResolveDataset(spec.dataset);
  if (data.dim() != spec.architecture.widths.front()) {
    throw std::invalid_argument("dataset width " + std::to_string(data.dim()) +
                                " does not match the model input width");
  }
  const BatchSchedule schedule =
      FixedBatches(cfg.seed, data.size(), cfg.batch_size, cfg.steps);
  Rng init_rng = MakeStream(cfg.seed, StreamTag::kInit);
  const MlpModel theta_0 = MlpModel::GlorotInit(spec.architecture, init_rng);

  Rng adversary_rng = MakeStream(cfg.seed, StreamTag::kAdversary);
  const std::unique_ptr<Adversary> adversary = PrepareAdversary(
      spec.adversary, AdversaryContext{cfg, data, schedule, theta_0},
      adversary_rng);

  AuditResult result;
  result.adversary = spec.adversary.kind;
  if (const auto* crafted =
          std::get_if<CraftedGradient>(&adversary->insertion())) {
    result.biased_dim = crafted->biased_dim;
  }
  result.insertions = InsertionCount(cfg.steps, cfg.periodicity);
  result.bits.resize(cfg.runs);
  result.scores.resize(cfg.runs);
  std::atomic<int64_t> failures{0};

  ParallelFor(cfg.runs, spec.jobs, [&](int64_t run) {
    Rng bit_rng = MakeStream(cfg.seed, StreamTag::kBits, run);
    const int bit = std::bernoulli_distribution(0.5)(bit_rng) ? 1 : 0;
    std::optional<MlpModel> run_init;
    if (cfg.random_init_per_run) {
      Rng rng = MakeStream(cfg.seed, StreamTag::kRunInit, run);
      run_init = MlpModel::GlorotInit(spec.architecture, rng);
    }
    for (int attempt = 0;; ++attempt) {
      // The noise stream depends on the run and attempt only, never on the
      // bit, so both arms of a run see identical noise.
      Rng noise_rng = MakeStream(cfg.seed, StreamTag::kNoise, run, attempt);
      try {
        EndpointParams endpoints =
            Train(cfg, data, schedule, run_init ? *run_init : theta_0,
                  adversary->insertion(), bit, noise_rng);
        // With an unknown initialisation the adversary can only score
        // against the nominal one.
        if (run_init) endpoints.initial = theta_0.params();
        result.bits[run] = bit;
        result.scores[run] = adversary->Score(endpoints);
        return;
      } catch (const TrainingDivergence&) {
        ++failures;
        if (attempt + 1 >= kMaxAttempts) throw;
      }
    }
  });

  result.failed_runs = failures.load();
  if (result.failed_runs * 100 > cfg.runs) {
    throw std::runtime_error("too many diverged training runs: " +
                             std::to_string(result.failed_runs));
  }
  const std::vector<ScoreRecord> records = result.records();
  result.report = AuditEpsilon(records, cfg.delta, cfg.confidence);
  result.report.eps_theory = TheoreticalEpsilon(cfg);
  return result;
}

std::vector<std::pair<double, double>> PrivacyProfile(
    GdpMu mu_hat, std::span<const double> eps_grid) {
  std::vector<std::pair<double, double>> profile;
  profile.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    profile.emplace_back(eps, GdpToDelta(mu_hat, eps));
  }
  return profile;
}

void WriteAuditOutputs(const std::filesystem::path& dir,
                       const AuditResult& result) {
  std::filesystem::create_directories(dir);
  WriteCsv(dir / "report.csv", AuditReportCsvHeader(),
           {AuditReportCsvRow(result.report)});
  std::vector<std::string> rows;
  rows.reserve(result.scores.size());
  for (size_t i = 0; i < result.scores.size(); ++i) {
    rows.push_back(JoinCsv({std::to_string(i), std::to_string(result.bits[i]),
                            FormatDouble(result.scores[i])}));
  }
  WriteCsv(dir / "scores.csv", "run_index,bit,score", rows);
}

void WriteProfileCsv(const std::filesystem::path& path,
                     const std::vector<std::pair<double, double>>& profile) {
  std::vector<std::string> rows;
  rows.reserve(profile.size());
  for (const auto& [eps, delta] : profile) {
    rows.push_back(JoinCsv({FormatDouble(eps), FormatDouble(delta)}));
  }
  WriteCsv(path, "eps,delta", rows);
}

}  // namespace dpaudit

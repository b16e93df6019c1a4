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

#include "dpaudit/hidden_state_sim.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpaudit/csv.h"
#include "dpaudit/gdp_math.h"
#include "dpaudit/parallel.h"

namespace dpaudit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void Require(bool ok, const char* field, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(std::string("sim.") + field + ": " + what);
  }
}

bool CanaryBit(const SimConfig& cfg, int64_t run) {
  Rng rng = MakeStream(cfg.seed, StreamTag::kBits, run);
  return std::bernoulli_distribution(0.5)(rng);
}

// Fills theta[0..T) for one run without allocating.
void Simulate(const SimConfig& cfg, const DriftFunction& g, Rng& rng,
              bool with_canary, double* theta) {
  NormalSampler normal;
  const double noise_sd = cfg.clip_c * cfg.sigma;
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_b);
  double x = noise_sd * normal(rng) + (with_canary ? cfg.clip_c : 0.0);
  theta[0] = x;
  for (int64_t t = 1; t < cfg.steps; ++t) {
    const double z = noise_sd * normal(rng);
    x += (g(x, cfg.batch_b, cfg.clip_c) + z) * inv_b;
    theta[t] = x;
  }
}

}  // namespace

void ValidateSimConfig(const SimConfig& cfg) {
  Require(cfg.steps >= 1, "steps", "must be >= 1");
  Require(cfg.batch_b >= 1, "batch_b", "must be >= 1");
  Require(cfg.clip_c > 0.0 && std::isfinite(cfg.clip_c), "clip_c",
          "must be positive");
  Require(cfg.sigma > 0.0 && std::isfinite(cfg.sigma), "sigma",
          "must be positive");
  Require(cfg.runs >= 2, "runs", "must be >= 2");
  Require(cfg.delta > 0.0 && cfg.delta < 1.0, "delta", "must be in (0, 1)");
  Require(cfg.confidence > 0.0 && cfg.confidence < 1.0, "confidence",
          "must be in (0, 1)");
  Require(cfg.jobs >= 0, "jobs", "must be >= 0");
}

double GWorstCase(double x, int64_t b, double c, double h) {
  const double bound = static_cast<double>(b) * c;
  return x > h ? bound : -bound;
}

double OptimalThreshold(double c) {
  if (!(c > 0.0)) throw std::domain_error("OptimalThreshold: C must be > 0");
  return 0.5 * c;
}

double DriftFunction::operator()(double x, int64_t b, double c) const {
  if (kind_ == Kind::kWorstCase) return GWorstCase(x, b, c, parameter_);
  if (std::abs(parameter_) > static_cast<double>(b) * c) {
    throw std::domain_error("constant drift exceeds BC in magnitude");
  }
  return parameter_;
}

SimTrajectory SimulatePair(const SimConfig& cfg, const DriftFunction& g,
                           Rng& rng, bool with_canary) {
  ValidateSimConfig(cfg);
  SimTrajectory out;
  out.with_canary = with_canary;
  out.theta.resize(cfg.steps);
  Simulate(cfg, g, rng, with_canary, out.theta.data());
  return out;
}

std::vector<double> SimCurve::eps_hat() const {
  std::vector<double> out;
  out.reserve(reports.size());
  for (const AuditReport& r : reports) out.push_back(r.eps_hat);
  return out;
}

namespace {

std::vector<char> CanaryArms(const SimConfig& cfg) {
  std::vector<char> canary(cfg.runs);
  // bit == 0 is the canary arm, as in the training audit.
  for (int64_t run = 0; run < cfg.runs; ++run) {
    canary[run] = CanaryBit(cfg, run) ? 0 : 1;
  }
  return canary;
}

ClopperPearsonTables TablesFor(const SimConfig& cfg,
                               const std::vector<char>& canary) {
  int64_t inserted = 0;
  for (char c : canary) inserted += c;
  if (inserted == 0 || inserted == cfg.runs) {
    throw std::runtime_error("AuditSim: every run landed in one arm");
  }
  return ClopperPearsonTables(cfg.runs - inserted, inserted, cfg.confidence);
}

SimCurve AuditSimWithTables(const SimConfig& cfg, const DriftFunction& g,
                            const std::vector<char>& canary,
                            const ClopperPearsonTables& tables) {
  const int64_t steps = cfg.steps;
  // Row-major runs x steps.
  std::vector<double> theta(static_cast<size_t>(cfg.runs * steps));
  ParallelFor(cfg.runs, cfg.jobs, [&](int64_t run) {
    Rng rng = MakeStream(cfg.seed, StreamTag::kSimulation, run);
    Simulate(cfg, g, rng, canary[run] != 0, &theta[run * steps]);
  });

  SimCurve curve;
  curve.eps_theory = GdpToEps(GdpMu{1.0 / cfg.sigma}, cfg.delta);
  curve.reports.resize(steps);
  ParallelFor(steps, cfg.jobs, [&](int64_t t) {
    std::vector<ScoreRecord> records(cfg.runs);
    for (int64_t run = 0; run < cfg.runs; ++run) {
      records[run] = {theta[run * steps + t], canary[run] != 0};
    }
    curve.reports[t] = AuditEpsilon(records, cfg.delta, tables);
    curve.reports[t].eps_theory = curve.eps_theory;
  });
  return curve;
}

}  // namespace

SimCurve AuditSim(const SimConfig& cfg, const DriftFunction& g) {
  ValidateSimConfig(cfg);
  const std::vector<char> canary = CanaryArms(cfg);
  return AuditSimWithTables(cfg, g, canary, TablesFor(cfg, canary));
}

double AmplificationRate(std::span<const double> eps_series) {
  if (eps_series.size() < 2) {
    throw std::domain_error("AmplificationRate: need at least two steps");
  }
  if (!(eps_series.front() > 0.0)) {
    throw std::domain_error(
        "AmplificationRate: undefined when the first-step estimate is 0");
  }
  return eps_series.back() / eps_series.front();
}

std::vector<AmpCell> AmpGrid(const SimConfig& base,
                             std::span<const int64_t> batch_sizes,
                             std::span<const double> sigmas) {
  std::vector<AmpCell> cells;
  for (int64_t b : batch_sizes) {
    for (double sigma : sigmas) {
      SimConfig cfg = base;
      cfg.batch_b = b;
      cfg.sigma = sigma;
      const SimCurve curve =
          AuditSim(cfg, DriftFunction::WorstCase(OptimalThreshold(cfg.clip_c)));
      const std::vector<double> eps = curve.eps_hat();
      AmpCell cell{b, sigma, std::numeric_limits<double>::quiet_NaN()};
      if (eps.front() > 0.0) cell.ratio = AmplificationRate(eps);
      cells.push_back(cell);
    }
  }
  return cells;
}

ThresholdSearchResult ThresholdSearch(const SimConfig& cfg, int d) {
  if (d < 2) throw std::invalid_argument("threshold_search.d: must be >= 2");
  SimConfig two_step = cfg;
  two_step.steps = 2;
  ValidateSimConfig(two_step);

  const double c = cfg.clip_c;
  const double noise_sd = c * cfg.sigma;
  const double h_star = OptimalThreshold(c);

  // alpha_max > 1/2 exceeds the noise tail mass above h*, so the grid always
  // brackets h*.
  ThresholdSearchResult result;
  const double alpha_max = StdNormalCdf(c / (2.0 * cfg.sigma * cfg.sigma));
  for (int i = 0; i < d; ++i) {
    const double alpha = alpha_max * i / (d - 1);
    double h;
    if (alpha <= 0.0) {
      h = kInf;
    } else if (alpha >= 1.0) {
      h = -kInf;
    } else {
      h = noise_sd * StdNormalQuantile(1.0 - alpha);
    }
    result.alphas.push_back(alpha);
    result.thresholds.push_back(h);
  }

  const std::vector<char> canary = CanaryArms(two_step);
  const ClopperPearsonTables tables = TablesFor(two_step, canary);
  result.eps_hat.resize(d);
  for (int i = 0; i < d; ++i) {
    const SimCurve curve = AuditSimWithTables(
        two_step, DriftFunction::WorstCase(result.thresholds[i]), canary,
        tables);
    result.eps_hat[i] = curve.reports.back().eps_hat;
  }
  result.h_star_eps =
      AuditSimWithTables(two_step, DriftFunction::WorstCase(h_star), canary,
                         tables)
          .reports.back()
          .eps_hat;

  double nearest_gap = kInf;
  for (int i = 0; i < d; ++i) {
    if (result.eps_hat[i] > result.eps_hat[result.best_index]) {
      result.best_index = i;
    }
    const double gap = std::abs(result.thresholds[i] - h_star);
    if (gap < nearest_gap) {
      nearest_gap = gap;
      result.nearest_index = i;
    }
  }
  result.best_eps = result.eps_hat[result.best_index];
  result.best_h = result.thresholds[result.best_index];
  const auto offset = static_cast<int64_t>(result.best_index) -
                      static_cast<int64_t>(result.nearest_index);
  result.optimal_within_grid = std::abs(offset) <= 1;
  return result;
}

void WriteSimCurveCsv(const std::filesystem::path& path,
                      const SimCurve& curve) {
  std::vector<std::string> rows;
  for (size_t t = 0; t < curve.reports.size(); ++t) {
    rows.push_back(JoinCsv({std::to_string(t + 1),
                            FormatDouble(curve.reports[t].eps_hat),
                            FormatDouble(curve.eps_theory)}));
  }
  WriteCsv(path, "t,eps_hat,eps_theory", rows);
}

void WriteAmpGridCsv(const std::filesystem::path& path,
                     const std::vector<AmpCell>& cells) {
  std::vector<std::string> rows;
  for (const AmpCell& cell : cells) {
    rows.push_back(JoinCsv({std::to_string(cell.batch_b),
                            FormatDouble(cell.sigma),
                            FormatDouble(cell.ratio)}));
  }
  WriteCsv(path, "B,sigma,ratio", rows);
}

void WriteThresholdSearchCsv(const std::filesystem::path& path,
                             const ThresholdSearchResult& result) {
  std::vector<std::string> rows;
  for (size_t i = 0; i < result.alphas.size(); ++i) {
    rows.push_back(JoinCsv({FormatDouble(result.alphas[i]),
                            FormatDouble(result.thresholds[i]),
                            FormatDouble(result.eps_hat[i])}));
  }
  WriteCsv(path, "alpha,h,eps_hat", rows);
}

}  // namespace dpaudit

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

#ifndef DPAUDIT_STATS_H_
#define DPAUDIT_STATS_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dpaudit/gdp_math.h"

namespace dpaudit {

// Adversary confidence for one audit run together with the ground truth of
// whether the canary (or crafted gradient) was inserted in that run.
struct ScoreRecord {
  double score = 0.0;
  bool inserted = false;
};

// A "positive" prediction claims the canary was inserted.
struct ConfusionCounts {
  int64_t tn = 0;
  int64_t tp = 0;
  int64_t fn = 0;
  int64_t fp = 0;

  int64_t total() const { return tn + tp + fn + fp; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Which side of the threshold is predicted as "inserted".
// kLess predicts inserted when score <= threshold; kGreater when
// score > threshold.
enum class Direction { kLess, kGreater };

std::string DirectionName(Direction direction);

struct AuditReport {
  ConfusionCounts counts;
  // One-sided upper confidence bounds on the Type-I (false positive) and
  // Type-II (false negative) rates at the selected threshold.
  double alpha_bound = 1.0;
  double beta_bound = 1.0;
  GdpMu mu_hat;
  double eps_hat = 0.0;
  // Filled in by the audit runner; NaN when no accountant was consulted.
  double eps_theory = std::numeric_limits<double>::quiet_NaN();
  double delta = 1e-5;
  double confidence = 0.95;
  double threshold = 0.0;
  Direction direction = Direction::kLess;
};

ConfusionCounts ConfusionAtThreshold(std::span<const ScoreRecord> records,
                                     double threshold, Direction direction);

// One-sided Clopper-Pearson upper bound on a binomial rate after observing
// `errors` successes in `trials`: the Beta(k + 1, n - k) quantile at
// `confidence`, or 1 when k == n.
double ClopperPearsonUpper(int64_t errors, int64_t trials, double confidence);

// max(0, Phi^{-1}(1 - alpha) - Phi^{-1}(beta)). Rejects rates of exactly 0
// or 1; callers feed confidence bounds, which never reach 0.
GdpMu ErrorRatesToMu(double alpha_bound, double beta_bound);

// Full auditing pipeline over a score set: sweeps every midpoint between
// consecutive distinct scores in both directions, bounds both error rates
// with Clopper-Pearson, converts each pair to mu and returns the report of
// the threshold with the largest eps lower bound at `delta`.
AuditReport AuditEpsilon(std::span<const ScoreRecord> records, double delta,
                         double confidence);

// Phi^{-1} of every Clopper-Pearson upper bound for fixed arm sizes. Audits of
// several score sets with the same bits can share one table.
class ClopperPearsonTables {
 public:
  ClopperPearsonTables(int64_t not_inserted, int64_t inserted,
                       double confidence);

  int64_t not_inserted() const { return not_inserted_; }
  int64_t inserted() const { return inserted_; }
  double confidence() const { return confidence_; }
  // +inf where the bound is 1.
  double alpha_quantile(int64_t fp) const { return q_alpha_[fp]; }
  double beta_quantile(int64_t fn) const { return q_beta_[fn]; }

 private:
  int64_t not_inserted_;
  int64_t inserted_;
  double confidence_;
  std::vector<double> q_alpha_;
  std::vector<double> q_beta_;
};

// Same as above with precomputed tables; throws std::domain_error if the arm
// sizes of `records` differ from the tables'.
AuditReport AuditEpsilon(std::span<const ScoreRecord> records, double delta,
                         const ClopperPearsonTables& tables);

// Picks the threshold and direction on the first `selection_fraction` of the
// records and bounds the error rates on the rest. The report's counts refer to
// the held-out records only.
AuditReport AuditEpsilonHeldOut(std::span<const ScoreRecord> records,
                                double delta, double confidence,
                                double selection_fraction);

// Plug-in (alpha, beta) curve of threshold tests on the records, taken at
// `grid` thresholds placed on score quantiles, in the direction that
// separates the arms best. Points are sorted by alpha.
std::vector<TradeoffPoint> EmpiricalTradeoff(
    std::span<const ScoreRecord> records, int grid);

// Largest |beta - G_mu(alpha)| across curve points whose alpha lies in
// [alpha_lo, alpha_hi], with the curve linearly interpolated at the window
// edges.
double TradeoffDeviation(std::span<const TradeoffPoint> curve, GdpMu mu,
                         double alpha_lo, double alpha_hi);

// CSV serialisation of a report, columns:
// eps_hat,eps_theory,mu_hat,alpha_bound,beta_bound,tn,tp,fn,fp,threshold,
// delta,confidence
std::string AuditReportCsvHeader();
std::string AuditReportCsvRow(const AuditReport& report);

}  // namespace dpaudit

#endif  // DPAUDIT_STATS_H_

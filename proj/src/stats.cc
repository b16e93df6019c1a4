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

#include "dpaudit/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <boost/math/special_functions/beta.hpp>

#include "dpaudit/csv.h"

namespace dpaudit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ArmSizes {
  int64_t inserted = 0;
  int64_t not_inserted = 0;
};

ArmSizes CountArms(std::span<const ScoreRecord> records) {
  ArmSizes sizes;
  for (const ScoreRecord& r : records) {
    if (!std::isfinite(r.score)) {
      throw std::domain_error("score records must be finite");
    }
    (r.inserted ? sizes.inserted : sizes.not_inserted)++;
  }
  return sizes;
}

// Phi^{-1}(CP(k, n)) for k = 0..n; +inf where the bound saturates at 1.
std::vector<double> QuantileOfUpperBounds(int64_t n, double confidence) {
  std::vector<double> table(n + 1);
  for (int64_t k = 0; k <= n; ++k) {
    const double bound = ClopperPearsonUpper(k, n, confidence);
    table[k] = bound >= 1.0 ? kInf : StdNormalQuantile(bound);
  }
  return table;
}

// Scores sorted ascending, with the running count of inserted records among
// the first j entries, j = 0..N.
struct SortedScores {
  std::vector<double> scores;
  std::vector<int64_t> inserted_prefix;
};

SortedScores Sort(std::span<const ScoreRecord> records) {
  std::vector<ScoreRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreRecord& a, const ScoreRecord& b) {
              return a.score < b.score;
            });
  SortedScores out;
  out.scores.reserve(sorted.size());
  out.inserted_prefix.assign(sorted.size() + 1, 0);
  for (size_t i = 0; i < sorted.size(); ++i) {
    out.scores.push_back(sorted[i].score);
    out.inserted_prefix[i + 1] =
        out.inserted_prefix[i] + (sorted[i].inserted ? 1 : 0);
  }
  return out;
}

// Confusion counts when the first `cut` sorted records fall on the
// "<= threshold" side.
ConfusionCounts CountsAtCut(const SortedScores& s, const ArmSizes& arms,
                            size_t cut, Direction direction) {
  const int64_t ins_low = s.inserted_prefix[cut];
  const int64_t non_low = static_cast<int64_t>(cut) - ins_low;
  ConfusionCounts c;
  if (direction == Direction::kLess) {
    c.tp = ins_low;
    c.fp = non_low;
    c.fn = arms.inserted - ins_low;
    c.tn = arms.not_inserted - non_low;
  } else {
    c.tp = arms.inserted - ins_low;
    c.fp = arms.not_inserted - non_low;
    c.fn = ins_low;
    c.tn = non_low;
  }
  return c;
}

}  // namespace

std::string DirectionName(Direction direction) {
  return direction == Direction::kLess ? "less" : "greater";
}

ConfusionCounts ConfusionAtThreshold(std::span<const ScoreRecord> records,
                                     double threshold, Direction direction) {
  if (records.empty()) {
    throw std::domain_error("ConfusionAtThreshold: no records");
  }
  ConfusionCounts c;
  for (const ScoreRecord& r : records) {
    const bool predicted = direction == Direction::kLess
                               ? r.score <= threshold
                               : r.score > threshold;
    if (predicted) {
      (r.inserted ? c.tp : c.fp)++;
    } else {
      (r.inserted ? c.fn : c.tn)++;
    }
  }
  return c;
}

double ClopperPearsonUpper(int64_t errors, int64_t trials, double confidence) {
  if (trials < 1 || errors < 0 || errors > trials) {
    throw std::domain_error("ClopperPearsonUpper: need 0 <= k <= n, n >= 1");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::domain_error("ClopperPearsonUpper: confidence must be in (0,1)");
  }
  if (errors == trials) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(errors + 1),
                                static_cast<double>(trials - errors),
                                confidence);
}

GdpMu ErrorRatesToMu(double alpha_bound, double beta_bound) {
  if (!(alpha_bound > 0.0 && alpha_bound < 1.0) ||
      !(beta_bound > 0.0 && beta_bound < 1.0)) {
    throw std::domain_error("ErrorRatesToMu: rates must lie in (0, 1)");
  }
  const double mu =
      -StdNormalQuantile(alpha_bound) - StdNormalQuantile(beta_bound);
  return GdpMu{std::max(0.0, mu)};
}

ClopperPearsonTables::ClopperPearsonTables(int64_t not_inserted,
                                           int64_t inserted, double confidence)
    : not_inserted_(not_inserted),
      inserted_(inserted),
      confidence_(confidence),
      q_alpha_(QuantileOfUpperBounds(not_inserted, confidence)),
      q_beta_(QuantileOfUpperBounds(inserted, confidence)) {}

AuditReport AuditEpsilon(std::span<const ScoreRecord> records, double delta,
                         double confidence) {
  const ArmSizes arms = CountArms(records);
  if (arms.inserted == 0 || arms.not_inserted == 0) {
    throw std::domain_error("AuditEpsilon: both arms must be non-empty");
  }
  return AuditEpsilon(
      records, delta,
      ClopperPearsonTables(arms.not_inserted, arms.inserted, confidence));
}

AuditReport AuditEpsilon(std::span<const ScoreRecord> records, double delta,
                         const ClopperPearsonTables& tables) {
  const ArmSizes arms = CountArms(records);
  if (arms.inserted == 0 || arms.not_inserted == 0) {
    throw std::domain_error("AuditEpsilon: both arms must be non-empty");
  }
  if (arms.inserted != tables.inserted() ||
      arms.not_inserted != tables.not_inserted()) {
    throw std::domain_error("AuditEpsilon: tables built for other arm sizes");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("AuditEpsilon: delta must be in (0, 1)");
  }
  const double confidence = tables.confidence();
  const SortedScores s = Sort(records);

  AuditReport best;
  best.delta = delta;
  best.confidence = confidence;
  best.counts = CountsAtCut(s, arms, 0, Direction::kLess);
  best.threshold = s.scores.front() - 1.0;
  best.alpha_bound = ClopperPearsonUpper(0, arms.not_inserted, confidence);
  best.beta_bound = 1.0;

  if (s.scores.front() == s.scores.back()) return best;

  // eps at fixed delta is increasing in mu, so the threshold maximising the
  // eps bound is the one maximising the mu bound.
  double best_mu = 0.0;
  size_t best_cut = 0;
  Direction best_dir = Direction::kLess;
  bool found = false;
  for (size_t cut = 1; cut < s.scores.size(); ++cut) {
    if (s.scores[cut - 1] == s.scores[cut]) continue;
    for (Direction dir : {Direction::kLess, Direction::kGreater}) {
      const ConfusionCounts c = CountsAtCut(s, arms, cut, dir);
      const double mu =
          -tables.alpha_quantile(c.fp) - tables.beta_quantile(c.fn);
      if (mu > best_mu) {
        best_mu = mu;
        best_cut = cut;
        best_dir = dir;
        found = true;
      }
    }
  }
  if (!found) return best;

  best.counts = CountsAtCut(s, arms, best_cut, best_dir);
  best.direction = best_dir;
  best.threshold = 0.5 * (s.scores[best_cut - 1] + s.scores[best_cut]);
  best.alpha_bound =
      ClopperPearsonUpper(best.counts.fp, arms.not_inserted, confidence);
  best.beta_bound =
      ClopperPearsonUpper(best.counts.fn, arms.inserted, confidence);
  best.mu_hat = ErrorRatesToMu(best.alpha_bound, best.beta_bound);
  best.eps_hat = GdpToEps(best.mu_hat, delta);
  return best;
}

AuditReport AuditEpsilonHeldOut(std::span<const ScoreRecord> records,
                                double delta, double confidence,
                                double selection_fraction) {
  if (!(selection_fraction > 0.0 && selection_fraction < 1.0)) {
    throw std::domain_error(
        "AuditEpsilonHeldOut: selection_fraction must be in (0, 1)");
  }
  const auto split = static_cast<size_t>(
      std::ceil(selection_fraction * static_cast<double>(records.size())));
  if (split == 0 || split >= records.size()) {
    throw std::domain_error("AuditEpsilonHeldOut: too few records to split");
  }
  const AuditReport chosen =
      AuditEpsilon(records.first(split), delta, confidence);
  const auto rest = records.subspan(split);
  const ArmSizes arms = CountArms(rest);
  if (arms.inserted == 0 || arms.not_inserted == 0) {
    throw std::domain_error("AuditEpsilonHeldOut: held-out arm is empty");
  }
  AuditReport r;
  r.delta = delta;
  r.confidence = confidence;
  r.threshold = chosen.threshold;
  r.direction = chosen.direction;
  r.counts = ConfusionAtThreshold(rest, r.threshold, r.direction);
  r.alpha_bound =
      ClopperPearsonUpper(r.counts.fp, arms.not_inserted, confidence);
  r.beta_bound = ClopperPearsonUpper(r.counts.fn, arms.inserted, confidence);
  if (r.alpha_bound < 1.0 && r.beta_bound < 1.0) {
    r.mu_hat = ErrorRatesToMu(r.alpha_bound, r.beta_bound);
    r.eps_hat = GdpToEps(r.mu_hat, delta);
  }
  return r;
}

std::vector<TradeoffPoint> EmpiricalTradeoff(
    std::span<const ScoreRecord> records, int grid) {
  if (records.empty() || grid < 2) {
    throw std::domain_error("EmpiricalTradeoff: need records and grid >= 2");
  }
  const ArmSizes arms = CountArms(records);
  if (arms.inserted == 0 || arms.not_inserted == 0) {
    throw std::domain_error("EmpiricalTradeoff: both arms must be non-empty");
  }
  double mean_inserted = 0.0;
  double mean_other = 0.0;
  for (const ScoreRecord& r : records) {
    (r.inserted ? mean_inserted : mean_other) += r.score;
  }
  mean_inserted /= static_cast<double>(arms.inserted);
  mean_other /= static_cast<double>(arms.not_inserted);
  const Direction dir =
      mean_inserted <= mean_other ? Direction::kLess : Direction::kGreater;

  const SortedScores s = Sort(records);
  const size_t n = s.scores.size();
  std::vector<TradeoffPoint> curve;
  curve.reserve(grid);
  for (int i = 0; i < grid; ++i) {
    size_t cut = static_cast<size_t>(
        std::llround(static_cast<double>(i) / (grid - 1) * n));
    // Move the cut off a run of tied scores so it is a genuine threshold.
    while (cut > 0 && cut < n && s.scores[cut - 1] == s.scores[cut]) ++cut;
    const ConfusionCounts c = CountsAtCut(s, arms, cut, dir);
    curve.push_back(
        {static_cast<double>(c.fp) / static_cast<double>(arms.not_inserted),
         static_cast<double>(c.fn) / static_cast<double>(arms.inserted)});
  }
  std::sort(curve.begin(), curve.end(),
            [](const TradeoffPoint& a, const TradeoffPoint& b) {
              return a.alpha < b.alpha || (a.alpha == b.alpha && a.beta > b.beta);
            });
  return curve;
}

double TradeoffDeviation(std::span<const TradeoffPoint> curve, GdpMu mu,
                         double alpha_lo, double alpha_hi) {
  if (curve.size() < 2 || !(alpha_lo <= alpha_hi)) {
    throw std::domain_error("TradeoffDeviation: need a curve and lo <= hi");
  }
  auto beta_at = [&](double alpha) {
    auto it = std::lower_bound(
        curve.begin(), curve.end(), alpha,
        [](const TradeoffPoint& p, double a) { return p.alpha < a; });
    if (it == curve.begin()) return it->beta;
    if (it == curve.end()) return curve.back().beta;
    const TradeoffPoint& hi = *it;
    const TradeoffPoint& lo = *(it - 1);
    if (hi.alpha == lo.alpha) return hi.beta;
    const double w = (alpha - lo.alpha) / (hi.alpha - lo.alpha);
    return lo.beta + w * (hi.beta - lo.beta);
  };
  double worst = std::max(std::abs(beta_at(alpha_lo) - GdpTradeoff(mu, alpha_lo)),
                          std::abs(beta_at(alpha_hi) - GdpTradeoff(mu, alpha_hi)));
  for (const TradeoffPoint& p : curve) {
    if (p.alpha < alpha_lo || p.alpha > alpha_hi) continue;
    worst = std::max(worst, std::abs(p.beta - GdpTradeoff(mu, p.alpha)));
  }
  return worst;
}

std::string AuditReportCsvHeader() {
  return "eps_hat,eps_theory,mu_hat,alpha_bound,beta_bound,tn,tp,fn,fp,"
         "threshold,delta,confidence";
}

std::string AuditReportCsvRow(const AuditReport& r) {
  return JoinCsv({FormatDouble(r.eps_hat), FormatDouble(r.eps_theory),
                  FormatDouble(r.mu_hat.mu), FormatDouble(r.alpha_bound),
                  FormatDouble(r.beta_bound), std::to_string(r.counts.tn),
                  std::to_string(r.counts.tp), std::to_string(r.counts.fn),
                  std::to_string(r.counts.fp), FormatDouble(r.threshold),
                  FormatDouble(r.delta), FormatDouble(r.confidence)});
}

}  // namespace dpaudit

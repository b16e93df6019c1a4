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

#include "dpaudit/gdp_math.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

namespace dpaudit {
namespace {

// Below this point erfc(-x / sqrt(2)) approaches the subnormal range and the
// asymptotic expansion of the Mills ratio takes over.
constexpr double kLogCdfAsymptoticCutoff = -37.0;

// Bisection stops once the bracket is this small relative to its upper end.
constexpr double kEpsRelativeTolerance = 1e-14;
constexpr double kMaxEps = 1e6;

}  // namespace

double StdNormalCdf(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("StdNormalCdf: non-finite input");
  }
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double LogStdNormalCdf(double x) {
  if (std::isnan(x)) {
    throw std::domain_error("LogStdNormalCdf: NaN input");
  }
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  if (x == -std::numeric_limits<double>::infinity()) {
    return -std::numeric_limits<double>::infinity();
  }
  if (x > 0.0) {
    return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  }
  if (x >= kLogCdfAsymptoticCutoff) {
    return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  }
  // Phi(x) = phi(x) / |x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...).
  const double inv_x2 = 1.0 / (x * x);
  const double series =
      1.0 - inv_x2 * (1.0 - inv_x2 * (3.0 - inv_x2 * (15.0 - inv_x2 * 105.0)));
  return -0.5 * x * x - std::log(-x) -
         0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double StdNormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("StdNormalQuantile: p must lie in (0, 1), got " +
                            std::to_string(p));
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double GdpTradeoff(GdpMu mu, double alpha) {
  if (mu.mu < 0.0 || std::isnan(alpha)) {
    throw std::domain_error("GdpTradeoff: requires mu >= 0");
  }
  if (alpha <= 0.0) return 1.0;
  if (alpha >= 1.0) return 0.0;
  // Phi^{-1}(1 - alpha) == -Phi^{-1}(alpha), without rounding 1 - alpha.
  return StdNormalCdf(-StdNormalQuantile(alpha) - mu.mu);
}

double EpsDeltaTradeoff(EpsDelta ed, double alpha) {
  if (ed.eps < 0.0 || ed.delta < 0.0 || ed.delta > 1.0 || alpha < 0.0 ||
      alpha > 1.0) {
    throw std::domain_error("EpsDeltaTradeoff: argument out of range");
  }
  const double steep = 1.0 - ed.delta - std::exp(ed.eps) * alpha;
  const double shallow = std::exp(-ed.eps) * (1.0 - ed.delta - alpha);
  return std::max({0.0, steep, shallow});
}

double GdpToDelta(GdpMu mu, double eps) {
  if (mu.mu < 0.0 || std::isnan(eps)) {
    throw std::domain_error("GdpToDelta: requires mu >= 0");
  }
  if (mu.mu == 0.0) return 0.0;
  const double m = mu.mu;
  const double head = StdNormalCdf(-eps / m + m / 2.0);
  const double tail = std::exp(eps + LogStdNormalCdf(-eps / m - m / 2.0));
  return std::max(0.0, head - tail);
}

double GdpToEps(GdpMu mu, double delta) {
  if (mu.mu < 0.0 || !(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("GdpToEps: requires mu >= 0 and 0 < delta < 1");
  }
  if (mu.mu == 0.0 || GdpToDelta(mu, 0.0) <= delta) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (GdpToDelta(mu, hi) > delta) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxEps) {
      throw std::domain_error("GdpToEps: eps beyond supported range");
    }
  }
  while (hi - lo > kEpsRelativeTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (GdpToDelta(mu, mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

GdpMu ComposeGaussianGdp(int64_t n_insertions, double sigma) {
  if (n_insertions < 0) {
    throw std::domain_error("ComposeGaussianGdp: negative insertion count");
  }
  if (!(sigma > 0.0)) {
    throw std::domain_error("ComposeGaussianGdp: sigma must be positive");
  }
  return GdpMu{std::sqrt(static_cast<double>(n_insertions)) / sigma};
}

}  // namespace dpaudit

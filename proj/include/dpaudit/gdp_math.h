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

#ifndef DPAUDIT_GDP_MATH_H_
#define DPAUDIT_GDP_MATH_H_

#include <cstdint>

namespace dpaudit {

// Gaussian differential privacy parameter. A mechanism is mu-GDP when
// distinguishing its outputs on neighbouring inputs is no easier than
// distinguishing N(0, 1) from N(mu, 1).
struct GdpMu {
  double mu = 0.0;
};

struct EpsDelta {
  double eps = 0.0;
  double delta = 0.0;
};

// One point of a trade-off curve: Type-I error alpha against the smallest
// achievable Type-II error beta.
struct TradeoffPoint {
  double alpha = 0.0;
  double beta = 0.0;
};

// Standard normal CDF. Throws std::domain_error on non-finite input.
double StdNormalCdf(double x);

// log(StdNormalCdf(x)), accurate far into the lower tail where the CDF
// itself underflows.
double LogStdNormalCdf(double x);

// Inverse of StdNormalCdf. Throws std::domain_error unless 0 < p < 1.
double StdNormalQuantile(double p);

// G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu). The endpoints alpha = 0 and
// alpha = 1 return their limits 1 and 0.
double GdpTradeoff(GdpMu mu, double alpha);

// Trade-off function of (eps, delta)-DP:
// max{0, 1 - delta - e^eps alpha, e^-eps (1 - delta - alpha)}.
double EpsDeltaTradeoff(EpsDelta ed, double alpha);

// Tightest delta at which a mu-GDP mechanism is (eps, delta)-DP:
//   delta(eps) = Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2).
// The second term is evaluated in log space so that large eps neither
// overflows nor cancels. Returns 0 for mu = 0.
double GdpToDelta(GdpMu mu, double eps);

// Smallest eps >= 0 with GdpToDelta(mu, eps) <= delta, found by bisection on
// a geometrically grown bracket. Returns 0 if delta(0) already meets delta.
double GdpToEps(GdpMu mu, double delta);

// Exact GDP parameter of n adaptive compositions of a Gaussian mechanism with
// sensitivity C and noise standard deviation sigma * C: sqrt(n) / sigma.
GdpMu ComposeGaussianGdp(int64_t n_insertions, double sigma);

}  // namespace dpaudit

#endif  // DPAUDIT_GDP_MATH_H_

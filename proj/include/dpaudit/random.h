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

#ifndef DPAUDIT_RANDOM_H_
#define DPAUDIT_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

#include <boost/random/normal_distribution.hpp>

namespace dpaudit {

using Rng = std::mt19937_64;

// Purpose tags keep the streams of different consumers disjoint.
enum class StreamTag : uint64_t {
  kDataset = 1,
  kBatches = 2,
  kInit = 3,
  kAdversary = 4,
  kBits = 5,
  kNoise = 6,
  kRunInit = 7,
  kSimulation = 8,
};

// SplitMix64 finaliser.
uint64_t Mix64(uint64_t x);

// Counter-based stream derivation: the seed of stream (tag, index, attempt)
// depends only on its coordinates, never on how many other streams were
// created before it or on which thread asks.
uint64_t DeriveSeed(uint64_t master, StreamTag tag, uint64_t index = 0,
                    uint64_t attempt = 0);

Rng MakeStream(uint64_t master, StreamTag tag, uint64_t index = 0,
               uint64_t attempt = 0);

// Standard normal draws via the ziggurat sampler.
class NormalSampler {
 public:
  double operator()(Rng& rng) { return dist_(rng); }

  void Fill(Rng& rng, std::span<double> out, double stddev) {
    for (double& v : out) v = stddev * dist_(rng);
  }

 private:
  boost::random::normal_distribution<double> dist_;
};

}  // namespace dpaudit

#endif  // DPAUDIT_RANDOM_H_

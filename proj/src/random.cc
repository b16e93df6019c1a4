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

#include "dpaudit/random.h"

namespace dpaudit {

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t master, StreamTag tag, uint64_t index,
                    uint64_t attempt) {
  uint64_t h = Mix64(master);
  h = Mix64(h ^ static_cast<uint64_t>(tag));
  h = Mix64(h ^ index);
  return Mix64(h ^ attempt);
}

Rng MakeStream(uint64_t master, StreamTag tag, uint64_t index,
               uint64_t attempt) {
  return Rng(DeriveSeed(master, tag, index, attempt));
}

}  // namespace dpaudit

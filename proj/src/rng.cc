// Copyright 2026 The wkws Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wkws/rng.h"

#include <cmath>
#include <numbers>

namespace wkws {

uint64_t Mix64(uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t seed, uint64_t index) {
  return Mix64(Mix64(seed ^ 0x6a09e667f3bcc909ULL) + Mix64(index + 0x9e3779b97f4a7c15ULL));
}

uint64_t Rng::NextU64() {
  ++counter_;
  return Mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

uint64_t Rng::UniformInt(uint64_t n) {
  if (n == UINT64_MAX) return NextU64();
  const uint64_t range = n + 1;
  // Reject the top partial bucket.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % range;
}

double Rng::UniformDouble() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  double u1;
  do {
    u1 = UniformDouble();
  } while (u1 <= 0.0);
  const double u2 = UniformDouble();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::Split(uint64_t stream) const {
  return Rng(DeriveSeed(key_, stream));
}

}  // namespace wkws

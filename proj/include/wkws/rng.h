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

#ifndef WKWS_RNG_H_
#define WKWS_RNG_H_

#include <cstdint>

namespace wkws {

// Counter-based 64-bit generator. Output i of a stream is a pure function
// of (key, i), so results are identical on every platform and a stream can
// be split into independent children by key derivation. Does not use the
// <random> distributions, whose outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t key) : key_(key) {}

  uint64_t NextU64();

  // Uniform integer on [0, n] inclusive, without modulo bias.
  uint64_t UniformInt(uint64_t n);

  // Uniform double on [0, 1) with 53 random bits.
  double UniformDouble();

  // Uniform double on [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * UniformDouble(); }

  // Standard normal via Box-Muller (no cached second value).
  double Normal();

  // Independent child stream; deterministic in (key, stream).
  Rng Split(uint64_t stream) const;

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

// SplitMix64 finalizer.
uint64_t Mix64(uint64_t x);

// Seed for item `index` under `seed`, e.g. per-record synthesis seeds.
uint64_t DeriveSeed(uint64_t seed, uint64_t index);

}  // namespace wkws

#endif  // WKWS_RNG_H_

// Copyright 2026 The iolkin Authors
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

#pragma once

#include <cstdint>
#include <random>

namespace iolkin {

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are implementation-defined,
/// so every derived variate is computed here from raw 64-bit draws:
///
///   uniform()      = (draw >> 11) * 2^-53            in [0, 1)
///   uniform(a, b)  = a + (b - a) * uniform()
///   index(n)       = floor(uniform() * n)            in [0, n)
///   normal()       = Box-Muller cosine branch, consuming two uniforms:
///                    sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
///
/// Reference vectors pinning these transforms live in tests/unit/test_random.cpp.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t index(std::uint64_t n) {
    auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Derives an independent child seed; used to give each video its own stream.
  std::uint64_t split() { return engine_() ^ 0x9E3779B97F4A7C15ULL; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace iolkin

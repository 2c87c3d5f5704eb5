// Copyright 2026 The lrnkit Authors.
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

#include <cstddef>
#include <cstdint>
#include <random>

namespace lrn {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014):
///   z += 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z ^= z >> 31
std::uint64_t splitmix64(std::uint64_t z) noexcept;

/// Portable generator: the engine is std::mt19937_64, whose output sequence is
/// fixed by the C++ standard, seeded with splitmix64(seed). All conversions to
/// reals and ranges are done here rather than through <random> distributions,
/// whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for (seed, index): seeded with
  /// splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019)).
  static Rng for_stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller; no cached second value.
  double normal();

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace lrn

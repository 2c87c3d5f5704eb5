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


// Recurrence throughput harness.
//
//   fused  every parameterized product for the sequence runs before the loop;
//          the loop does O(d) work per step (Elman keeps h·U in the loop, so
//          its fused mode is only partially fused and is flagged as such)
//   naive  every product, including x_t·W, runs inside the loop
//
// With layer_norm, each parameterized product is normalized: LRN cells
// normalize Q, K, V (and O_pre) once before the loop; Elman normalizes X·W
// before the loop and h·U at every step.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrnkit/cells.hpp"

namespace lrn {

enum class BenchMode { fused, naive };
enum class Precision { f32, f64 };

std::string_view to_string(BenchMode mode);
std::string_view to_string(Precision precision);
BenchMode parse_bench_mode(std::string_view name);
Precision parse_precision(std::string_view name);

struct BenchConfig {
  CellKind kind = CellKind::lrn;
  BenchMode mode = BenchMode::fused;
  std::size_t d = 512;
  std::size_t n = 256;
  std::size_t batch = 32;
  std::size_t repeats = 5;
  std::size_t warmups = 2;
  Precision precision = Precision::f32;
  bool layer_norm = false;
  bool backward = false;  // forward+backward sub-mode
  std::uint64_t seed = 1;

  /// Throws BenchError for repeats < 5, warmups < 2, zero sizes, or
  /// backward combined with layer_norm.
  void validate() const;
};

class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchReport {
  BenchConfig config;
  bool partial_fusion = false;
  double equivalence_error = 0.0;  // max |fused − naive| over the batch
  std::vector<double> seconds;     // one wall time per timed repeat
  double median_seconds = 0.0;
  double steps_per_second = 0.0;  // batch·n / median
  std::string environment;
};

/// Checks fused and naive agree to within kBenchEquivalenceTolerance on the
/// whole batch, then times the requested mode. Throws BenchError if the check
/// fails; no timings are taken in that case.
BenchReport run_bench(const BenchConfig& config);

inline constexpr double kBenchEquivalenceTolerance = 1e-12;

double median(std::vector<double> values);

nlohmann::json to_json(const BenchReport& report);

}  // namespace lrn

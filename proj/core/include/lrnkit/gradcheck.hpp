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


// Central finite-difference check of backward_sequence for one random cell.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrnkit/cells.hpp"

namespace lrn {

/// Denominator floor for relative errors, so entries whose true gradient is
/// numerically zero are judged on absolute error instead.
inline constexpr double kRelativeErrorFloor = 1e-6;

/// |analytic − numeric| / max(|analytic|, |numeric|, kRelativeErrorFloor).
double relative_error(double analytic, double numeric);

struct GradcheckEntry {
  std::string name;  // parameter name, "X" or "h0"
  std::size_t count = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

struct GradcheckReport {
  CellKind kind = CellKind::lrn;
  Activation activation = Activation::tanh;
  std::size_t d = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::vector<GradcheckEntry> entries;

  double max_rel_error() const;
  /// Name of the entry holding max_rel_error().
  std::string worst() const;
};

/// Builds a random cell (d_in = d), random biases, inputs, h0 and upstream
/// gradients from `seed`, then compares every analytic gradient against
/// (L(θ+δ) − L(θ−δ)) / 2δ with L = Σ_t ⟨dH_t, h_t⟩.
GradcheckReport gradcheck_cell(CellKind kind, Activation activation, std::size_t d, std::size_t n,
                               std::uint64_t seed, double delta = 1e-5);

nlohmann::json to_json(const GradcheckReport& report);

}  // namespace lrn

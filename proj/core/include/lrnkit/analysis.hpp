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


// One-step Jacobians ∂h_t/∂h_{t−1} and backward gradient-norm profiles.
//
// For LRN the Jacobian is diagonal with entries
//   (σ_i′⊙v_t − h_{t−1}⊙σ_f′ + f_t) ⊙ g′(u_t),  σ_i′ = i(1−i), σ_f′ = f(1−f).
// For Elman it is Uᵀ with row j scaled by g′(a_j).

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrnkit/cells.hpp"

namespace lrn {

/// Diagonal of the LRN Jacobian as a 1×d row. Throws std::invalid_argument
/// for caches of any other kind.
Matrix lrn_jacobian_diag(const StepCache& cache, Activation g);

/// Full d×d Elman Jacobian (entry [j][m] = ∂h_j/∂h_prev_m).
Matrix elman_jacobian(const CellParams& params, const StepCache& cache, Activation g);

struct NormProfile {
  CellKind kind = CellKind::lrn;
  std::size_t d = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// ‖∂L/∂h_t‖₂ for t = n, n−1, …, 1.
  std::vector<double> norms;

  /// max/min over the profile (infinity if some norm is exactly zero).
  double ratio() const;
};

/// Forward over X, then backward with dh_final (1×d; all ones when empty)
/// injected at the last step only.
NormProfile gradient_norm_profile(const CellParams& params, const Matrix& inputs, const Matrix& dh_final = {},
                                  std::uint64_t seed = 0);

nlohmann::json to_json(const NormProfile& profile);

}  // namespace lrn

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


// Closed-form view of an LRN-family trajectory. With g = identity and h0 = 0
// the recurrence unrolls to
//
//   h_t = Σ_{k≤t} w(t,k) ⊙ v_k,   w(t,k) = i_k ⊙ f_t ⊙ f_{t-1} ⊙ … ⊙ f_{k+1}
//
// where i_k plays the role of a key and the forget product that of a query.
// Positions are 0-based.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrnkit/cells.hpp"

namespace lrn {

struct WeightChain {
  std::size_t t = 0;  // evaluation position
  std::size_t k = 0;  // source position, k ≤ t
  Matrix key;         // i_k
  Matrix query;       // forget product (all ones when k == t)
  Matrix w;           // key ⊙ query
};

struct DecayCurve {
  std::size_t source = 0;
  /// values[j] is the channel mean of w(source + j, source).
  std::vector<double> values;

  double at(std::size_t t) const { return values.at(t - source); }
  double final_value() const { return values.back(); }
};

/// w(t, k) alone. Needs gates (any LRN-family kind).
WeightChain weight_chain(const Trajectory& trajectory, std::size_t t, std::size_t k);

/// w(t, k) for k = t, t−1, …, 0 (returned in ascending k). Unnormalized.
/// Requires the trajectory to admit the expansion (see expand_hidden).
std::vector<WeightChain> attention_weights(const Trajectory& trajectory, std::size_t t);

/// Σ_k w(t,k) ⊙ v_k. Throws std::invalid_argument unless the trajectory comes
/// from lrn, glrn or elrn with g = identity and an all-zero h0.
Matrix expand_hidden(const Trajectory& trajectory, std::size_t t);

/// Largest |expand_hidden(t) − h_t| over every t.
double max_expansion_error(const Trajectory& trajectory);

/// Decay of source position k, evaluated at k..n−1. Any activation; rejects
/// Elman trajectories (no gates) and k ≥ n.
DecayCurve memory_trace(const Trajectory& trajectory, std::size_t k);

/// One curve per source position.
std::vector<DecayCurve> memory_traces(const Trajectory& trajectory);

/// CSV with header source_pos,token,eval_pos,weight_mean, one row per (k,t)
/// pair with k ≤ t. `tokens` labels source positions and must have length n.
void write_trace_csv(std::ostream& out, const Trajectory& trajectory, const std::vector<std::string>& tokens);

}  // namespace lrn

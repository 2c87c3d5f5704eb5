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


#include <gtest/gtest.h>

#include <sstream>

#include "lrnkit/decomposition.hpp"
#include "oracles.hpp"

namespace lrn {
namespace {

// A d=1 LRN trajectory with hand-chosen gates and values.
Trajectory forced(std::vector<double> i, std::vector<double> f, std::vector<double> v) {
  const std::size_t n = i.size();
  Trajectory traj;
  traj.kind = CellKind::lrn;
  traj.activation = Activation::identity;
  traj.h0 = Matrix(1, 1);
  traj.i = Matrix(n, 1, i);
  traj.f = Matrix(n, 1, f);
  traj.projections.v = Matrix(n, 1, v);
  traj.h = Matrix(n, 1);
  traj.u = Matrix(n, 1);
  return traj;
}

Trajectory identity_run(CellKind kind, std::size_t d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const CellParams p = CellParams::initialize(kind, Activation::identity, d, d, rng);
  return forward_sequence(p, random_normal<double>(n, d, rng));
}

TEST(ExpandHidden, FirstPositionIsInputGateTimesValue) {
  const Trajectory traj = identity_run(CellKind::lrn, 4, 6, 1);
  EXPECT_EQ(expand_hidden(traj, 0), hadamard(traj.i.row_matrix(0), traj.projections.v.row_matrix(0)));
}

TEST(ExpandHidden, TwoStepScalarCase) {
  const Trajectory traj = forced({0.5, 0.5}, {0.3, 0.5}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(expand_hidden(traj, 1)(0, 0), 0.75);
}

TEST(ExpandHidden, MatchesRecurrenceForGatedKinds) {
  for (CellKind kind : {CellKind::lrn, CellKind::glrn, CellKind::elrn}) {
    const Trajectory traj = identity_run(kind, 8, 32, 21);
    EXPECT_LE(max_expansion_error(traj), 1e-9) << to_string(kind);
    for (std::size_t t = 0; t < 32; ++t) {
      EXPECT_LE(max_abs_diff(expand_hidden(traj, t), traj.h.row_matrix(t)), 1e-9);
    }
  }
}

TEST(ExpandHidden, RejectsInvalidTrajectories) {
  Rng rng(2);
  const CellParams tanh_params = CellParams::initialize(CellKind::lrn, Activation::tanh, 3, 3, rng);
  const Matrix x = random_normal<double>(4, 3, rng);
  EXPECT_THROW(expand_hidden(forward_sequence(tanh_params, x), 1), std::invalid_argument);

  const CellParams p = CellParams::initialize(CellKind::lrn, Activation::identity, 3, 3, rng);
  EXPECT_THROW(expand_hidden(forward_sequence(p, x, Matrix(1, 3, 0.1)), 1), std::invalid_argument);

  const CellParams olrn = CellParams::initialize(CellKind::olrn, Activation::identity, 3, 3, rng);
  EXPECT_THROW(expand_hidden(forward_sequence(olrn, x), 1), std::invalid_argument);

  const CellParams elman = CellParams::initialize(CellKind::elman, Activation::identity, 3, 3, rng);
  EXPECT_THROW(expand_hidden(forward_sequence(elman, x), 1), std::invalid_argument);
  EXPECT_THROW(attention_weights(forward_sequence(elman, x), 1), std::invalid_argument);
}

TEST(AttentionWeights, DiagonalIsInputGate) {
  const Trajectory traj = identity_run(CellKind::lrn, 5, 8, 3);
  const auto weights = attention_weights(traj, 6);
  ASSERT_EQ(weights.size(), 7u);
  EXPECT_EQ(weights.back().k, 6u);
  EXPECT_EQ(weights.back().w, traj.i.row_matrix(6));
  EXPECT_EQ(weights.back().query, Matrix(1, 5, 1.0));
}

TEST(AttentionWeights, NoDecayWhenForgetGatesAreOne) {
  const Trajectory traj = forced({0.2, 0.7, 0.4, 0.9}, {1, 1, 1, 1}, {1, 2, 3, 4});
  const auto weights = attention_weights(traj, 3);
  for (const WeightChain& chain : weights) EXPECT_EQ(chain.w(0, 0), traj.i(chain.k, 0));
}

TEST(AttentionWeights, ReconstructExpansionExactly) {
  const Trajectory traj = identity_run(CellKind::glrn, 6, 20, 4);
  for (std::size_t t = 0; t < 20; ++t) {
    Matrix total(1, 6);
    for (const WeightChain& chain : attention_weights(traj, t)) {
      add_in_place(total, hadamard(chain.w, traj.projections.v.row_matrix(chain.k)));
      EXPECT_EQ(chain.w, hadamard(chain.key, chain.query));
    }
    EXPECT_LE(max_abs_diff(total, expand_hidden(traj, t)), 1e-12);
  }
}

TEST(AttentionWeights, EntriesInUnitInterval) {
  const Trajectory traj = identity_run(CellKind::lrn, 6, 24, 5);
  for (std::size_t t = 0; t < 24; ++t) {
    for (const WeightChain& chain : attention_weights(traj, t)) {
      for (double w : chain.w.values()) {
        EXPECT_GT(w, 0.0);
        EXPECT_LT(w, 1.0);
      }
    }
  }
}

TEST(MemoryTrace, StartsAtMeanInputGate) {
  const Trajectory traj = identity_run(CellKind::lrn, 4, 10, 6);
  const DecayCurve curve = memory_trace(traj, 3);
  double mean = 0.0;
  for (double v : traj.i.row(3)) mean += v;
  EXPECT_NEAR(curve.at(3), mean / 4.0, 1e-15);
  EXPECT_EQ(curve.values.size(), 7u);
  EXPECT_EQ(curve.source, 3u);
}

TEST(MemoryTrace, GeometricDecayForHalfGates) {
  const Trajectory traj = forced({0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {0, 0, 0, 0});
  const DecayCurve curve = memory_trace(traj, 0);
  ASSERT_EQ(curve.values.size(), 4u);
  EXPECT_EQ(curve.values[0], 0.5);
  EXPECT_EQ(curve.values[1], 0.25);
  EXPECT_EQ(curve.values[2], 0.125);
  EXPECT_EQ(curve.values[3], 0.0625);
}

TEST(MemoryTrace, StrictlyDecreasingForAnyActivationAndKind) {
  for (CellKind kind : {CellKind::lrn, CellKind::olrn, CellKind::glrn, CellKind::elrn}) {
    Rng rng(7);
    const CellParams p = CellParams::initialize(kind, Activation::tanh, 4, 5, rng);
    const Trajectory traj = forward_sequence(p, random_normal<double>(15, 4, rng));
    for (const DecayCurve& curve : memory_traces(traj)) {
      for (std::size_t j = 0; j < curve.values.size(); ++j) {
        EXPECT_GT(curve.values[j], 0.0);
        EXPECT_LT(curve.values[j], 1.0);
        if (j > 0) EXPECT_LT(curve.values[j], curve.values[j - 1]) << to_string(kind);
      }
    }
  }
}

TEST(MemoryTrace, Errors) {
  const Trajectory traj = identity_run(CellKind::lrn, 3, 5, 8);
  EXPECT_THROW(memory_trace(traj, 5), std::out_of_range);
  const Trajectory elman = identity_run(CellKind::elman, 3, 5, 8);
  EXPECT_THROW(memory_trace(elman, 0), std::invalid_argument);
}

TEST(TraceCsv, HeaderAndRowCount) {
  const Trajectory traj = forced({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, {0, 0, 0});
  std::ostringstream out;
  write_trace_csv(out, traj, {"great", "a,b", "movie"});
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 1u + 6u);
  EXPECT_EQ(lines[0], "source_pos,token,eval_pos,weight_mean");
  EXPECT_EQ(lines[1], "0,great,0,0.5");
  EXPECT_EQ(lines[2], "0,great,1,0.25");
  EXPECT_EQ(lines[4], "1,\"a,b\",1,0.5");
  EXPECT_THROW(write_trace_csv(out, traj, {"only"}), std::invalid_argument);
}

}  // namespace
}  // namespace lrn

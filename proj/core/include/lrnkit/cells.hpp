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

// Recurrent cells whose parameterized products are computed for the whole
// sequence before the recurrence runs.
//
// LRN family, per step t (rows q, k, v, o_pre of the precomputed projections):
//
//   lrn   i = σ(k + h₋)   f = σ(q − h₋)   h = g(i⊙v + f⊙h₋)
//   olrn  c = i⊙v + f⊙h₋ (gates as lrn)  o = σ(o_pre − c)   h = o⊙c
//   glrn  f = σ(q − h₋)   i = 1 − f       h = g(i⊙v + f⊙h₋)
//   elrn  f = σ(−h₋)      i = 1 − f       h = g(i⊙v + f⊙h₋)
//
// and the Elman baseline h = g(x·W + h₋·U + b), whose h₋·U term cannot leave
// the loop. Vectors are rows; weights map inputs on the right (x·W).

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "lrnkit/matrix.hpp"

namespace lrn {

enum class CellKind { lrn, olrn, glrn, elrn, elman };
enum class Activation { tanh, identity };

inline constexpr std::array<CellKind, 5> kAllCellKinds = {CellKind::lrn, CellKind::olrn, CellKind::glrn,
                                                          CellKind::elrn, CellKind::elman};

std::string_view to_string(CellKind kind);
std::string_view to_string(Activation activation);
/// Throws std::invalid_argument for unknown names.
CellKind parse_cell_kind(std::string_view name);
Activation parse_activation(std::string_view name);

constexpr bool is_lrn_family(CellKind kind) { return kind != CellKind::elman; }
constexpr bool has_query(CellKind kind) {
  return kind == CellKind::lrn || kind == CellKind::olrn || kind == CellKind::glrn;
}
constexpr bool has_key(CellKind kind) { return kind == CellKind::lrn || kind == CellKind::olrn; }
constexpr bool has_output_gate(CellKind kind) { return kind == CellKind::olrn; }
/// oLRN gates the cell state directly and never applies g.
constexpr bool uses_activation(CellKind kind) { return kind != CellKind::olrn; }

/// Per-variant weights. Matrices a variant does not use are absent
/// (std::nullopt), never zero-filled.
template <typename T>
struct BasicCellParams {
  using Mat = BasicMatrix<T>;

  CellKind kind = CellKind::lrn;
  Activation activation = Activation::tanh;
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;

  std::optional<Mat> w_q, b_q;  // input_size×d, 1×d
  std::optional<Mat> w_k, b_k;
  std::optional<Mat> w_v, b_v;
  std::optional<Mat> w_o, b_o;  // oLRN only
  std::optional<Mat> w, u, b;   // Elman only: input_size×d, d×d, 1×d

  /// Glorot-uniform weights, zero biases.
  static BasicCellParams initialize(CellKind kind, Activation activation, std::size_t input_size,
                                    std::size_t hidden_size, Rng& rng);
  /// Same layout, every present matrix zero.
  static BasicCellParams zeros(CellKind kind, Activation activation, std::size_t input_size,
                               std::size_t hidden_size);

  /// Throws ShapeError if a required matrix is missing, an unused one is
  /// present, or any shape disagrees with input_size/hidden_size.
  void validate() const;

  /// Visits present matrices as (name, matrix) in a fixed order:
  /// W_q b_q W_k b_k W_v b_v W_o b_o W U b.
  template <typename F>
  void for_each(F&& fn) {
    visit(*this, fn);
  }
  template <typename F>
  void for_each(F&& fn) const {
    visit(*this, fn);
  }

  std::size_t parameter_count() const;

  template <typename U>
  BasicCellParams<U> cast() const {
    BasicCellParams<U> out;
    out.kind = kind;
    out.activation = activation;
    out.input_size = input_size;
    out.hidden_size = hidden_size;
    auto convert = [](const std::optional<Mat>& m) {
      return m ? std::optional<BasicMatrix<U>>(m->template cast<U>()) : std::nullopt;
    };
    out.w_q = convert(w_q), out.b_q = convert(b_q);
    out.w_k = convert(w_k), out.b_k = convert(b_k);
    out.w_v = convert(w_v), out.b_v = convert(b_v);
    out.w_o = convert(w_o), out.b_o = convert(b_o);
    out.w = convert(w), out.u = convert(u), out.b = convert(b);
    return out;
  }

  bool operator==(const BasicCellParams&) const = default;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& fn) {
    auto one = [&](std::string_view name, auto& slot) {
      if (slot) fn(name, *slot);
    };
    one("W_q", self.w_q);
    one("b_q", self.b_q);
    one("W_k", self.w_k);
    one("b_k", self.b_k);
    one("W_v", self.w_v);
    one("b_v", self.b_v);
    one("W_o", self.w_o);
    one("b_o", self.b_o);
    one("W", self.w);
    one("U", self.u);
    one("b", self.b);
  }
};

/// Per-timestep affine maps of the input, all computed before the recurrence.
/// Row t depends on input row t only.
template <typename T>
struct BasicProjections {
  BasicMatrix<T> q, k, v, o_pre;  // LRN family; empty when the variant lacks them
  BasicMatrix<T> wx;              // Elman: X·W + b

  std::size_t length() const { return std::max({q.rows(), k.rows(), v.rows(), wx.rows()}); }
};

/// Everything one step produced, plus the inputs the analytic Jacobians need.
/// All members are 1×d; those a variant lacks stay empty.
template <typename T>
struct BasicStepCache {
  CellKind kind = CellKind::lrn;
  Activation activation = Activation::tanh;
  BasicMatrix<T> h_prev;
  BasicMatrix<T> v;  // value row (LRN family)
  BasicMatrix<T> i, f;
  BasicMatrix<T> u;  // pre-activation: i⊙v + f⊙h₋ (c for oLRN, x·W + h₋·U + b for Elman)
  BasicMatrix<T> o;
  BasicMatrix<T> h;
};

/// Full forward record, sufficient for exact backward replay. Per-step
/// quantities are stored as n×d matrices, row t holding step t.
template <typename T>
struct BasicTrajectory {
  CellKind kind = CellKind::lrn;
  Activation activation = Activation::tanh;
  BasicMatrix<T> inputs;  // n×d_in; empty when built from projections only
  BasicProjections<T> projections;
  BasicMatrix<T> h0;  // 1×d
  BasicMatrix<T> h, i, f, u, o;

  std::size_t length() const { return h.rows(); }
  std::size_t hidden_size() const { return h0.cols(); }
  /// h_{t-1} for step t (h0 when t == 0).
  std::span<const T> previous_state(std::size_t t) const { return t == 0 ? h0.row(0) : h.row(t - 1); }
  BasicMatrix<T> final_state() const { return length() == 0 ? h0 : h.row_matrix(length() - 1); }
  BasicStepCache<T> step(std::size_t t) const;
};

/// Gradients with respect to the hoisted projections, produced by running the
/// recurrence backwards. `dh` holds the total gradient reaching each h_t.
template <typename T>
struct BasicProjectionGrads {
  BasicMatrix<T> dq, dk, dv, do_pre;
  BasicMatrix<T> dwx;  // Elman: gradient of the pre-activation
  BasicMatrix<T> du;   // Elman: gradient of U
  BasicMatrix<T> dh;
  BasicMatrix<T> dh0;
};

/// One gradient per parameter (same layout as the parameters), plus the
/// input-sequence and initial-state gradients.
template <typename T>
struct BasicGradientSet {
  BasicCellParams<T> params;
  BasicMatrix<T> dx;
  BasicMatrix<T> dh0;

  template <typename F>
  void for_each(F&& fn) {
    params.for_each(fn);
  }
  template <typename F>
  void for_each(F&& fn) const {
    params.for_each(fn);
  }
};

using CellParams = BasicCellParams<double>;
using Projections = BasicProjections<double>;
using StepCache = BasicStepCache<double>;
using Trajectory = BasicTrajectory<double>;
using ProjectionGrads = BasicProjectionGrads<double>;
using GradientSet = BasicGradientSet<double>;

// Single steps on 1×d rows.

template <typename T>
BasicStepCache<T> lrn_step(const BasicMatrix<T>& q, const BasicMatrix<T>& k, const BasicMatrix<T>& v,
                           const BasicMatrix<T>& h_prev, Activation g);
template <typename T>
BasicStepCache<T> olrn_step(const BasicMatrix<T>& q, const BasicMatrix<T>& k, const BasicMatrix<T>& v,
                            const BasicMatrix<T>& o_pre, const BasicMatrix<T>& h_prev);
template <typename T>
BasicStepCache<T> glrn_step(const BasicMatrix<T>& q, const BasicMatrix<T>& v, const BasicMatrix<T>& h_prev,
                            Activation g);
template <typename T>
BasicStepCache<T> elrn_step(const BasicMatrix<T>& v, const BasicMatrix<T>& h_prev, Activation g);
/// Uses params.activation.
template <typename T>
BasicStepCache<T> elman_step(const BasicMatrix<T>& x, const BasicMatrix<T>& h_prev,
                             const BasicCellParams<T>& params);

// Sequences.

template <typename T>
BasicProjections<T> precompute_projections(const BasicMatrix<T>& inputs, const BasicCellParams<T>& params);

/// Runs the recurrence over already computed (and possibly post-processed,
/// e.g. layer-normalized) projections. An empty h0 means zeros.
template <typename T>
BasicTrajectory<T> forward_from_projections(const BasicCellParams<T>& params, BasicProjections<T> projections,
                                            const BasicMatrix<T>& h0 = {});

/// precompute_projections followed by the recurrence.
template <typename T>
BasicTrajectory<T> forward_sequence(const BasicCellParams<T>& params, const BasicMatrix<T>& inputs,
                                    const BasicMatrix<T>& h0 = {});

/// Reference implementation that multiplies every weight matrix inside the
/// loop, one timestep at a time. Numerically identical to forward_sequence.
template <typename T>
BasicTrajectory<T> forward_sequence_naive(const BasicCellParams<T>& params, const BasicMatrix<T>& inputs,
                                          const BasicMatrix<T>& h0 = {});

/// Trajectory sized for n steps with zero projection buffers, for callers
/// that fill projection row t themselves before calling advance(t).
template <typename T>
BasicTrajectory<T> make_trajectory(const BasicCellParams<T>& params, std::size_t n, const BasicMatrix<T>& h0 = {});

/// Runs step t from projection row t and h_{t−1}, writing row t of every
/// per-step record.
template <typename T>
void advance(const BasicCellParams<T>& params, BasicTrajectory<T>& trajectory, std::size_t t);

/// Reverse pass of the recurrence for upstream gradients dH (n×d, the
/// gradient of the loss with respect to each h_t through paths outside the
/// cell).
template <typename T>
BasicProjectionGrads<T> backward_recurrence(const BasicCellParams<T>& params, const BasicTrajectory<T>& trajectory,
                                            const BasicMatrix<T>& dH);

/// Maps projection gradients to weight, bias and input gradients.
template <typename T>
BasicGradientSet<T> backward_projections(const BasicCellParams<T>& params, const BasicMatrix<T>& inputs,
                                         const BasicProjectionGrads<T>& grads);

/// Exact gradients of L = Σ_t ⟨dH_t, h_t⟩ + (loss terms already folded into
/// dH) with respect to every parameter, the inputs and h0.
template <typename T>
BasicGradientSet<T> backward_sequence(const BasicCellParams<T>& params, const BasicTrajectory<T>& trajectory,
                                      const BasicMatrix<T>& dH);

}  // namespace lrn

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

#include "lrnkit/cells.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrnkit/rng.hpp"

namespace lrn {

std::string_view to_string(CellKind kind) {
  switch (kind) {
    case CellKind::lrn: return "lrn";
    case CellKind::olrn: return "olrn";
    case CellKind::glrn: return "glrn";
    case CellKind::elrn: return "elrn";
    case CellKind::elman: return "elman";
  }
  return "?";
}

std::string_view to_string(Activation activation) {
  return activation == Activation::tanh ? "tanh" : "identity";
}

CellKind parse_cell_kind(std::string_view name) {
  for (CellKind kind : kAllCellKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown cell kind '" + std::string(name) + "' (expected lrn, olrn, glrn, elrn, elman)");
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "' (expected tanh or identity)");
}

namespace {

template <typename T>
inline T activate(Activation g, T x) {
  return g == Activation::tanh ? std::tanh(x) : x;
}

// g'(u) expressed through h = g(u).
template <typename T>
inline T slope_from_value(Activation g, T h) {
  return g == Activation::tanh ? T{1} - h * h : T{1};
}

template <typename T>
void lrn_family_step(CellKind kind, Activation g, std::size_t d, const T* q, const T* k, const T* v, const T* o_pre,
                     const T* hp, T* i, T* f, T* u, T* o, T* h) {
  switch (kind) {
    case CellKind::lrn:
      for (std::size_t c = 0; c < d; ++c) {
        i[c] = sigmoid(k[c] + hp[c]);
        f[c] = sigmoid(q[c] - hp[c]);
        u[c] = i[c] * v[c] + f[c] * hp[c];
        h[c] = activate(g, u[c]);
      }
      return;
    case CellKind::olrn:
      for (std::size_t c = 0; c < d; ++c) {
        i[c] = sigmoid(k[c] + hp[c]);
        f[c] = sigmoid(q[c] - hp[c]);
        u[c] = i[c] * v[c] + f[c] * hp[c];
        o[c] = sigmoid(o_pre[c] - u[c]);
        h[c] = o[c] * u[c];
      }
      return;
    case CellKind::glrn:
      for (std::size_t c = 0; c < d; ++c) {
        f[c] = sigmoid(q[c] - hp[c]);
        i[c] = T{1} - f[c];
        u[c] = i[c] * v[c] + f[c] * hp[c];
        h[c] = activate(g, u[c]);
      }
      return;
    case CellKind::elrn:
      for (std::size_t c = 0; c < d; ++c) {
        f[c] = sigmoid(-hp[c]);
        i[c] = T{1} - f[c];
        u[c] = i[c] * v[c] + f[c] * hp[c];
        h[c] = activate(g, u[c]);
      }
      return;
    case CellKind::elman:
      break;
  }
  throw std::logic_error("lrn_family_step: Elman has no gated step");
}

// a = wx + h₋·U, h = g(a). `scratch` holds d values.
template <typename T>
void elman_recurrent_step(Activation g, const BasicMatrix<T>& u_weight, std::span<const T> wx, std::span<const T> hp,
                          std::span<T> scratch, std::span<T> a, std::span<T> h) {
  vecmat(hp, u_weight, scratch);
  for (std::size_t c = 0; c < a.size(); ++c) {
    a[c] = wx[c] + scratch[c];
    h[c] = activate(g, a[c]);
  }
}

// x·W + b for a single row, in the same order as the hoisted version.
template <typename T>
void affine_row(std::span<const T> x, const BasicMatrix<T>& weight, const BasicMatrix<T>& bias, std::span<T> out) {
  vecmat(x, weight, out);
  auto b = bias.row(0);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] += b[c];
}

template <typename T>
BasicMatrix<T> affine(const BasicMatrix<T>& x, const BasicMatrix<T>& weight, const BasicMatrix<T>& bias) {
  BasicMatrix<T> out = matmul(x, weight);
  auto b = bias.row(0);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto dst = out.row(r);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += b[c];
  }
  return out;
}

template <typename T>
void require_row(const char* op, const char* what, const BasicMatrix<T>& m, std::size_t d) {
  if (m.rows() != 1 || m.cols() != d) {
    throw ShapeError(std::string(op) + ": " + what + " is " + shape_string(m) + ", expected " + shape_string(1, d));
  }
}

template <typename T>
void require_shape(const char* op, const char* what, const BasicMatrix<T>& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(op) + ": " + what + " is " + shape_string(m) + ", expected " +
                     shape_string(rows, cols));
  }
}

template <typename T>
BasicMatrix<T> resolve_h0(const char* op, const BasicMatrix<T>& h0, std::size_t d) {
  if (h0.empty()) return BasicMatrix<T>(1, d);
  require_row(op, "h0", h0, d);
  return h0;
}

template <typename T>
BasicStepCache<T> run_gated_step(CellKind kind, Activation g, const BasicMatrix<T>* q, const BasicMatrix<T>* k,
                                 const BasicMatrix<T>& v, const BasicMatrix<T>* o_pre, const BasicMatrix<T>& h_prev) {
  const std::size_t d = h_prev.cols();
  const char* op = "step";
  require_row(op, "h_prev", h_prev, d);
  require_row(op, "v", v, d);
  if (q) require_row(op, "q", *q, d);
  if (k) require_row(op, "k", *k, d);
  if (o_pre) require_row(op, "o_pre", *o_pre, d);

  BasicStepCache<T> cache;
  cache.kind = kind;
  cache.activation = g;
  cache.h_prev = h_prev;
  cache.v = v;
  cache.i = BasicMatrix<T>(1, d);
  cache.f = BasicMatrix<T>(1, d);
  cache.u = BasicMatrix<T>(1, d);
  cache.h = BasicMatrix<T>(1, d);
  if (o_pre) cache.o = BasicMatrix<T>(1, d);
  lrn_family_step(kind, g, d, q ? q->values().data() : nullptr, k ? k->values().data() : nullptr,
                  v.values().data(), o_pre ? o_pre->values().data() : nullptr, h_prev.values().data(),
                  cache.i.values().data(), cache.f.values().data(), cache.u.values().data(),
                  o_pre ? cache.o.values().data() : nullptr, cache.h.values().data());
  return cache;
}

template <typename T>
T* row_ptr(BasicMatrix<T>& m, std::size_t t) {
  return m.empty() ? nullptr : m.row(t).data();
}

template <typename T>
const T* row_ptr(const BasicMatrix<T>& m, std::size_t t) {
  return m.empty() ? nullptr : m.row(t).data();
}

}  // namespace

template <typename T>
BasicCellParams<T> BasicCellParams<T>::zeros(CellKind kind, Activation activation, std::size_t input_size,
                                             std::size_t hidden_size) {
  if (input_size == 0 || hidden_size == 0) {
    throw ShapeError("cell params: sizes must be positive, got d_in=" + std::to_string(input_size) +
                     " d=" + std::to_string(hidden_size));
  }
  BasicCellParams p;
  p.kind = kind;
  p.activation = uses_activation(kind) ? activation : Activation::identity;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  const Mat weight(input_size, hidden_size);
  const Mat bias(1, hidden_size);
  if (kind == CellKind::elman) {
    p.w = weight;
    p.u = Mat(hidden_size, hidden_size);
    p.b = bias;
    return p;
  }
  if (has_query(kind)) p.w_q = weight, p.b_q = bias;
  if (has_key(kind)) p.w_k = weight, p.b_k = bias;
  p.w_v = weight, p.b_v = bias;
  if (has_output_gate(kind)) p.w_o = weight, p.b_o = bias;
  return p;
}

template <typename T>
BasicCellParams<T> BasicCellParams<T>::initialize(CellKind kind, Activation activation, std::size_t input_size,
                                                  std::size_t hidden_size, Rng& rng) {
  BasicCellParams p = zeros(kind, activation, input_size, hidden_size);
  // Draw order is part of the seed contract.
  for (auto* slot : {&p.w_q, &p.w_k, &p.w_v, &p.w_o, &p.w, &p.u}) {
    if (*slot) **slot = glorot_uniform<T>((*slot)->rows(), (*slot)->cols(), rng);
  }
  return p;
}

template <typename T>
void BasicCellParams<T>::validate() const {
  const std::size_t d = hidden_size;
  const std::string where = "cell params (" + std::string(to_string(kind)) + ")";
  auto expect = [&](const char* name, const std::optional<Mat>& slot, bool wanted, std::size_t rows,
                    std::size_t cols) {
    if (!wanted) {
      if (slot) throw ShapeError(where + ": unexpected " + name);
      return;
    }
    if (!slot) throw ShapeError(where + ": missing " + name);
    if (slot->rows() != rows || slot->cols() != cols) {
      throw ShapeError(where + ": " + name + " is " + shape_string(*slot) + ", expected " + shape_string(rows, cols));
    }
  };
  const bool gated = is_lrn_family(kind);
  expect("W_q", w_q, has_query(kind), input_size, d);
  expect("b_q", b_q, has_query(kind), 1, d);
  expect("W_k", w_k, has_key(kind), input_size, d);
  expect("b_k", b_k, has_key(kind), 1, d);
  expect("W_v", w_v, gated, input_size, d);
  expect("b_v", b_v, gated, 1, d);
  expect("W_o", w_o, has_output_gate(kind), input_size, d);
  expect("b_o", b_o, has_output_gate(kind), 1, d);
  expect("W", w, !gated, input_size, d);
  expect("U", u, !gated, d, d);
  expect("b", b, !gated, 1, d);
}

template <typename T>
std::size_t BasicCellParams<T>::parameter_count() const {
  std::size_t total = 0;
  for_each([&](std::string_view, const Mat& m) { total += m.size(); });
  return total;
}

template <typename T>
BasicStepCache<T> BasicTrajectory<T>::step(std::size_t t) const {
  if (t >= length()) throw std::out_of_range("trajectory step " + std::to_string(t) + " of " + std::to_string(length()));
  BasicStepCache<T> cache;
  cache.kind = kind;
  cache.activation = activation;
  const auto prev = previous_state(t);
  cache.h_prev = BasicMatrix<T>(1, prev.size(), std::vector<T>(prev.begin(), prev.end()));
  if (!projections.v.empty()) cache.v = projections.v.row_matrix(t);
  if (!i.empty()) cache.i = i.row_matrix(t);
  if (!f.empty()) cache.f = f.row_matrix(t);
  if (!o.empty()) cache.o = o.row_matrix(t);
  cache.u = u.row_matrix(t);
  cache.h = h.row_matrix(t);
  return cache;
}

template <typename T>
BasicStepCache<T> lrn_step(const BasicMatrix<T>& q, const BasicMatrix<T>& k, const BasicMatrix<T>& v,
                           const BasicMatrix<T>& h_prev, Activation g) {
  return run_gated_step<T>(CellKind::lrn, g, &q, &k, v, nullptr, h_prev);
}

template <typename T>
BasicStepCache<T> olrn_step(const BasicMatrix<T>& q, const BasicMatrix<T>& k, const BasicMatrix<T>& v,
                            const BasicMatrix<T>& o_pre, const BasicMatrix<T>& h_prev) {
  return run_gated_step<T>(CellKind::olrn, Activation::identity, &q, &k, v, &o_pre, h_prev);
}

template <typename T>
BasicStepCache<T> glrn_step(const BasicMatrix<T>& q, const BasicMatrix<T>& v, const BasicMatrix<T>& h_prev,
                            Activation g) {
  return run_gated_step<T>(CellKind::glrn, g, &q, nullptr, v, nullptr, h_prev);
}

template <typename T>
BasicStepCache<T> elrn_step(const BasicMatrix<T>& v, const BasicMatrix<T>& h_prev, Activation g) {
  return run_gated_step<T>(CellKind::elrn, g, nullptr, nullptr, v, nullptr, h_prev);
}

template <typename T>
BasicStepCache<T> elman_step(const BasicMatrix<T>& x, const BasicMatrix<T>& h_prev,
                             const BasicCellParams<T>& params) {
  if (params.kind != CellKind::elman) throw std::invalid_argument("elman_step: params are not an Elman cell");
  params.validate();
  const std::size_t d = params.hidden_size;
  require_row("elman_step", "x", x, params.input_size);
  require_row("elman_step", "h_prev", h_prev, d);

  BasicStepCache<T> cache;
  cache.kind = CellKind::elman;
  cache.activation = params.activation;
  cache.h_prev = h_prev;
  cache.u = BasicMatrix<T>(1, d);
  cache.h = BasicMatrix<T>(1, d);
  BasicMatrix<T> wx(1, d);
  std::vector<T> scratch(d);
  affine_row(x.row(0), *params.w, *params.b, wx.row(0));
  elman_recurrent_step<T>(params.activation, *params.u, wx.row(0), h_prev.row(0), scratch, cache.u.row(0),
                          cache.h.row(0));
  return cache;
}

template <typename T>
BasicTrajectory<T> make_trajectory(const BasicCellParams<T>& params, std::size_t n, const BasicMatrix<T>& h0) {
  params.validate();
  const std::size_t d = params.hidden_size;
  BasicTrajectory<T> traj;
  traj.kind = params.kind;
  traj.activation = params.activation;
  traj.h0 = resolve_h0("make_trajectory", h0, d);
  traj.h = BasicMatrix<T>(n, d);
  traj.u = BasicMatrix<T>(n, d);
  auto& p = traj.projections;
  if (params.kind == CellKind::elman) {
    p.wx = BasicMatrix<T>(n, d);
    return traj;
  }
  traj.i = BasicMatrix<T>(n, d);
  traj.f = BasicMatrix<T>(n, d);
  if (has_output_gate(params.kind)) traj.o = BasicMatrix<T>(n, d);
  if (has_query(params.kind)) p.q = BasicMatrix<T>(n, d);
  if (has_key(params.kind)) p.k = BasicMatrix<T>(n, d);
  p.v = BasicMatrix<T>(n, d);
  if (has_output_gate(params.kind)) p.o_pre = BasicMatrix<T>(n, d);
  return traj;
}

template <typename T>
void advance(const BasicCellParams<T>& params, BasicTrajectory<T>& traj, std::size_t t) {
  const std::size_t d = params.hidden_size;
  const auto& p = traj.projections;
  if (params.kind == CellKind::elman) {
    thread_local std::vector<T> scratch;
    scratch.resize(d);
    elman_recurrent_step(params.activation, *params.u, p.wx.row(t), traj.previous_state(t), std::span<T>(scratch),
                         traj.u.row(t), traj.h.row(t));
    return;
  }
  lrn_family_step(params.kind, params.activation, d, row_ptr(p.q, t), row_ptr(p.k, t), row_ptr(p.v, t),
                  row_ptr(p.o_pre, t), traj.previous_state(t).data(), row_ptr(traj.i, t), row_ptr(traj.f, t),
                  row_ptr(traj.u, t), row_ptr(traj.o, t), row_ptr(traj.h, t));
}

template <typename T>
BasicProjections<T> precompute_projections(const BasicMatrix<T>& inputs, const BasicCellParams<T>& params) {
  params.validate();
  if (inputs.cols() != params.input_size) {
    throw ShapeError("precompute_projections: inputs are " + shape_string(inputs) + " but the cell expects width " +
                     std::to_string(params.input_size));
  }
  BasicProjections<T> p;
  if (params.kind == CellKind::elman) {
    p.wx = affine(inputs, *params.w, *params.b);
    return p;
  }
  if (params.w_q) p.q = affine(inputs, *params.w_q, *params.b_q);
  if (params.w_k) p.k = affine(inputs, *params.w_k, *params.b_k);
  p.v = affine(inputs, *params.w_v, *params.b_v);
  if (params.w_o) p.o_pre = affine(inputs, *params.w_o, *params.b_o);
  return p;
}

template <typename T>
BasicTrajectory<T> forward_from_projections(const BasicCellParams<T>& params, BasicProjections<T> projections,
                                            const BasicMatrix<T>& h0) {
  params.validate();
  const std::size_t d = params.hidden_size;
  const std::size_t n = projections.length();
  const char* op = "forward";
  if (params.kind == CellKind::elman) {
    require_shape(op, "wx", projections.wx, n, d);
  } else {
    require_shape(op, "v", projections.v, n, d);
    if (has_query(params.kind)) require_shape(op, "q", projections.q, n, d);
    if (has_key(params.kind)) require_shape(op, "k", projections.k, n, d);
    if (has_output_gate(params.kind)) require_shape(op, "o_pre", projections.o_pre, n, d);
  }

  BasicTrajectory<T> traj = make_trajectory(params, 0, resolve_h0(op, h0, d));
  traj.projections = std::move(projections);
  traj.h = BasicMatrix<T>(n, d);
  traj.u = BasicMatrix<T>(n, d);
  if (is_lrn_family(params.kind)) {
    traj.i = BasicMatrix<T>(n, d);
    traj.f = BasicMatrix<T>(n, d);
  }
  if (has_output_gate(params.kind)) traj.o = BasicMatrix<T>(n, d);
  for (std::size_t t = 0; t < n; ++t) advance(params, traj, t);
  return traj;
}

template <typename T>
BasicTrajectory<T> forward_sequence(const BasicCellParams<T>& params, const BasicMatrix<T>& inputs,
                                    const BasicMatrix<T>& h0) {
  BasicTrajectory<T> traj = forward_from_projections(params, precompute_projections(inputs, params), h0);
  traj.inputs = inputs;
  return traj;
}

template <typename T>
BasicTrajectory<T> forward_sequence_naive(const BasicCellParams<T>& params, const BasicMatrix<T>& inputs,
                                          const BasicMatrix<T>& h0) {
  params.validate();
  if (inputs.cols() != params.input_size) {
    throw ShapeError("forward_sequence_naive: inputs are " + shape_string(inputs) +
                     " but the cell expects width " + std::to_string(params.input_size));
  }
  const std::size_t n = inputs.rows();
  const std::size_t d = params.hidden_size;
  BasicTrajectory<T> traj = make_trajectory(params, n, resolve_h0("forward_sequence_naive", h0, d));
  traj.inputs = inputs;
  auto& p = traj.projections;
  for (std::size_t t = 0; t < n; ++t) {
    auto x = inputs.row(t);
    if (params.kind == CellKind::elman) {
      affine_row(x, *params.w, *params.b, p.wx.row(t));
    } else {
      if (params.w_q) affine_row(x, *params.w_q, *params.b_q, p.q.row(t));
      if (params.w_k) affine_row(x, *params.w_k, *params.b_k, p.k.row(t));
      affine_row(x, *params.w_v, *params.b_v, p.v.row(t));
      if (params.w_o) affine_row(x, *params.w_o, *params.b_o, p.o_pre.row(t));
    }
    advance(params, traj, t);
  }
  return traj;
}

template <typename T>
BasicProjectionGrads<T> backward_recurrence(const BasicCellParams<T>& params, const BasicTrajectory<T>& traj,
                                            const BasicMatrix<T>& dH) {
  params.validate();
  if (traj.kind != params.kind) {
    throw std::invalid_argument("backward: trajectory of " + std::string(to_string(traj.kind)) +
                                " replayed with " + std::string(to_string(params.kind)) + " params");
  }
  const std::size_t n = traj.length();
  const std::size_t d = params.hidden_size;
  if (traj.hidden_size() != d) throw ShapeError("backward: trajectory width does not match params");
  require_shape("backward", "dH", dH, n, d);

  const CellKind kind = params.kind;
  const Activation g = traj.activation;
  BasicProjectionGrads<T> out;
  out.dh = BasicMatrix<T>(n, d);
  if (kind == CellKind::elman) {
    out.dwx = BasicMatrix<T>(n, d);
  } else {
    if (has_query(kind)) out.dq = BasicMatrix<T>(n, d);
    if (has_key(kind)) out.dk = BasicMatrix<T>(n, d);
    out.dv = BasicMatrix<T>(n, d);
    if (has_output_gate(kind)) out.do_pre = BasicMatrix<T>(n, d);
  }

  std::vector<T> carry(d, T{0});
  std::vector<T> next(d, T{0});
  for (std::size_t step = n; step-- > 0;) {
    auto total = out.dh.row(step);
    auto upstream = dH.row(step);
    for (std::size_t c = 0; c < d; ++c) total[c] = upstream[c] + carry[c];

    const T* hp = traj.previous_state(step).data();
    const T* h = traj.h.row(step).data();

    if (kind == CellKind::elman) {
      auto da = out.dwx.row(step);
      for (std::size_t c = 0; c < d; ++c) da[c] = total[c] * slope_from_value(g, h[c]);
      vecmat_t(std::span<const T>(da), *params.u, std::span<T>(next));
      carry.swap(next);
      continue;
    }

    const T* i = traj.i.row(step).data();
    const T* f = traj.f.row(step).data();
    const T* v = traj.projections.v.row(step).data();
    T* dv = out.dv.row(step).data();
    switch (kind) {
      case CellKind::lrn:
      case CellKind::olrn: {
        T* dq = out.dq.row(step).data();
        T* dk = out.dk.row(step).data();
        for (std::size_t c = 0; c < d; ++c) {
          T du;
          if (kind == CellKind::olrn) {
            // h = o⊙c, o = σ(o_pre − c)
            const T cell = traj.u(step, c);
            const T o = traj.o(step, c);
            const T dpre = total[c] * cell * o * (T{1} - o);
            out.do_pre(step, c) = dpre;
            du = total[c] * o - dpre;
          } else {
            du = total[c] * slope_from_value(g, h[c]);
          }
          const T dk_c = du * v[c] * i[c] * (T{1} - i[c]);
          const T dq_c = du * hp[c] * f[c] * (T{1} - f[c]);
          dk[c] = dk_c;
          dq[c] = dq_c;
          dv[c] = du * i[c];
          carry[c] = du * f[c] + dk_c - dq_c;
        }
        break;
      }
      case CellKind::glrn:
      case CellKind::elrn: {
        T* dq = kind == CellKind::glrn ? out.dq.row(step).data() : nullptr;
        for (std::size_t c = 0; c < d; ++c) {
          const T du = total[c] * slope_from_value(g, h[c]);
          // u = (1 − f)v + f h₋, so ∂u/∂f = h₋ − v; the gate's pre-activation
          // enters with +1 (q) and −1 (h₋).
          const T dpre = du * (hp[c] - v[c]) * f[c] * (T{1} - f[c]);
          if (dq) dq[c] = dpre;
          dv[c] = du * i[c];
          carry[c] = du * f[c] - dpre;
        }
        break;
      }
      case CellKind::elman:
        break;
    }
  }
  out.dh0 = BasicMatrix<T>(1, d, std::move(carry));

  if (kind == CellKind::elman) {
    BasicMatrix<T> previous(n, d);
    for (std::size_t t = 0; t < n; ++t) previous.set_row(t, traj.previous_state(t));
    out.du = matmul_tn(previous, out.dwx);
  }
  return out;
}

template <typename T>
BasicGradientSet<T> backward_projections(const BasicCellParams<T>& params, const BasicMatrix<T>& inputs,
                                         const BasicProjectionGrads<T>& grads) {
  params.validate();
  if (inputs.cols() != params.input_size) {
    throw ShapeError("backward: inputs are " + shape_string(inputs) + " but the cell expects width " +
                     std::to_string(params.input_size));
  }
  const std::size_t n = inputs.rows();
  BasicGradientSet<T> out;
  out.params = BasicCellParams<T>::zeros(params.kind, params.activation, params.input_size, params.hidden_size);
  out.dx = BasicMatrix<T>(n, params.input_size);
  out.dh0 = grads.dh0;

  auto route = [&](const std::optional<BasicMatrix<T>>& weight, const BasicMatrix<T>& dproj,
                   std::optional<BasicMatrix<T>>& dweight, std::optional<BasicMatrix<T>>& dbias) {
    if (!weight) return;
    require_shape("backward", "projection gradient", dproj, n, params.hidden_size);
    dweight = matmul_tn(inputs, dproj);
    dbias = sum_rows(dproj);
    add_in_place(out.dx, matmul_nt(dproj, *weight));
  };

  auto& g = out.params;
  if (params.kind == CellKind::elman) {
    route(params.w, grads.dwx, g.w, g.b);
    require_shape("backward", "dU", grads.du, params.hidden_size, params.hidden_size);
    g.u = grads.du;
    return out;
  }
  route(params.w_q, grads.dq, g.w_q, g.b_q);
  route(params.w_k, grads.dk, g.w_k, g.b_k);
  route(params.w_v, grads.dv, g.w_v, g.b_v);
  route(params.w_o, grads.do_pre, g.w_o, g.b_o);
  return out;
}

template <typename T>
BasicGradientSet<T> backward_sequence(const BasicCellParams<T>& params, const BasicTrajectory<T>& trajectory,
                                      const BasicMatrix<T>& dH) {
  if (trajectory.inputs.rows() != trajectory.length()) {
    throw std::invalid_argument("backward_sequence: trajectory carries no inputs; use backward_recurrence");
  }
  return backward_projections(params, trajectory.inputs, backward_recurrence(params, trajectory, dH));
}

#define LRNKIT_INSTANTIATE_CELLS(T)                                                                                \
  template struct BasicCellParams<T>;                                                                              \
  template struct BasicTrajectory<T>;                                                                              \
  template BasicStepCache<T> lrn_step(const BasicMatrix<T>&, const BasicMatrix<T>&, const BasicMatrix<T>&,         \
                                      const BasicMatrix<T>&, Activation);                                          \
  template BasicStepCache<T> olrn_step(const BasicMatrix<T>&, const BasicMatrix<T>&, const BasicMatrix<T>&,        \
                                       const BasicMatrix<T>&, const BasicMatrix<T>&);                              \
  template BasicStepCache<T> glrn_step(const BasicMatrix<T>&, const BasicMatrix<T>&, const BasicMatrix<T>&,        \
                                       Activation);                                                                \
  template BasicStepCache<T> elrn_step(const BasicMatrix<T>&, const BasicMatrix<T>&, Activation);                  \
  template BasicStepCache<T> elman_step(const BasicMatrix<T>&, const BasicMatrix<T>&, const BasicCellParams<T>&);  \
  template BasicTrajectory<T> make_trajectory(const BasicCellParams<T>&, std::size_t, const BasicMatrix<T>&);    \
  template void advance(const BasicCellParams<T>&, BasicTrajectory<T>&, std::size_t);                            \
  template BasicProjections<T> precompute_projections(const BasicMatrix<T>&, const BasicCellParams<T>&);           \
  template BasicTrajectory<T> forward_from_projections(const BasicCellParams<T>&, BasicProjections<T>,             \
                                                       const BasicMatrix<T>&);                                     \
  template BasicTrajectory<T> forward_sequence(const BasicCellParams<T>&, const BasicMatrix<T>&,                   \
                                               const BasicMatrix<T>&);                                             \
  template BasicTrajectory<T> forward_sequence_naive(const BasicCellParams<T>&, const BasicMatrix<T>&,             \
                                                     const BasicMatrix<T>&);                                       \
  template BasicProjectionGrads<T> backward_recurrence(const BasicCellParams<T>&, const BasicTrajectory<T>&,       \
                                                       const BasicMatrix<T>&);                                     \
  template BasicGradientSet<T> backward_projections(const BasicCellParams<T>&, const BasicMatrix<T>&,              \
                                                    const BasicProjectionGrads<T>&);                               \
  template BasicGradientSet<T> backward_sequence(const BasicCellParams<T>&, const BasicTrajectory<T>&,             \
                                                 const BasicMatrix<T>&);

LRNKIT_INSTANTIATE_CELLS(float)
LRNKIT_INSTANTIATE_CELLS(double)

#undef LRNKIT_INSTANTIATE_CELLS

}  // namespace lrn

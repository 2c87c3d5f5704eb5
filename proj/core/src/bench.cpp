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


#include "lrnkit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "lrnkit/parallel.hpp"
#include "lrnkit/rng.hpp"

namespace lrn {

std::string_view to_string(BenchMode mode) { return mode == BenchMode::fused ? "fused" : "naive"; }
std::string_view to_string(Precision precision) { return precision == Precision::f32 ? "f32" : "f64"; }

BenchMode parse_bench_mode(std::string_view name) {
  if (name == "fused") return BenchMode::fused;
  if (name == "naive") return BenchMode::naive;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected fused or naive)");
}

Precision parse_precision(std::string_view name) {
  if (name == "f32") return Precision::f32;
  if (name == "f64") return Precision::f64;
  throw std::invalid_argument("unknown precision '" + std::string(name) + "' (expected f32 or f64)");
}

void BenchConfig::validate() const {
  if (d == 0 || n == 0 || batch == 0) throw BenchError("bench: d, n and batch must be positive");
  if (repeats < 5) throw BenchError("bench: at least 5 timed repeats are required");
  if (warmups < 2) throw BenchError("bench: at least 2 warmup runs are required");
  if (backward && layer_norm) throw BenchError("bench: the forward+backward sub-mode does not support layer norm");
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

template <typename T>
struct Workload {
  BasicCellParams<T> params;
  std::vector<BasicMatrix<T>> inputs;  // one n×d sequence per lane
  BasicMatrix<T> gain, bias;
};

template <typename T>
void affine_row(std::span<const T> x, const BasicMatrix<T>& w, const BasicMatrix<T>& b, std::span<T> out) {
  vecmat(x, w, out);
  auto bias = b.row(0);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] += bias[c];
}

template <typename T>
void normalize_row(const Workload<T>& w, std::span<T> row, std::vector<T>& scratch) {
  scratch.assign(row.begin(), row.end());
  layer_norm_span<T>(scratch, w.gain.row(0), w.bias.row(0), static_cast<T>(kLayerNormEpsilon), row);
}

template <typename T>
void normalize_rows(const Workload<T>& w, BasicMatrix<T>& m) {
  if (m.empty()) return;
  m = layer_norm_rows(m, w.gain, w.bias, static_cast<T>(kLayerNormEpsilon));
}

template <typename T>
void append(std::vector<T>& out, const BasicMatrix<T>& m) {
  out.insert(out.end(), m.values().begin(), m.values().end());
}

// Elman with layer norm: h = g(LN(x·W + b) + LN(h₋·U)).
template <typename T>
BasicMatrix<T> elman_layer_norm(const Workload<T>& w, const BasicMatrix<T>& x, bool fused) {
  const auto& p = w.params;
  const std::size_t n = x.rows();
  const std::size_t d = p.hidden_size;
  BasicMatrix<T> wx = fused ? precompute_projections(x, p).wx : BasicMatrix<T>(n, d);
  if (fused) normalize_rows(w, wx);
  BasicMatrix<T> h(n, d);
  std::vector<T> prev(d, T{0}), rec(d), scratch;
  for (std::size_t t = 0; t < n; ++t) {
    if (!fused) {
      affine_row(x.row(t), *p.w, *p.b, wx.row(t));
      normalize_row(w, wx.row(t), scratch);
    }
    vecmat(std::span<const T>(prev), *p.u, std::span<T>(rec));
    normalize_row(w, std::span<T>(rec), scratch);
    auto in = wx.row(t);
    auto out = h.row(t);
    for (std::size_t c = 0; c < d; ++c) {
      const T a = in[c] + rec[c];
      out[c] = p.activation == Activation::tanh ? std::tanh(a) : a;
    }
    std::copy(out.begin(), out.end(), prev.begin());
  }
  return h;
}

template <typename T>
BasicMatrix<T> lrn_layer_norm_naive(const Workload<T>& w, const BasicMatrix<T>& x) {
  const auto& p = w.params;
  BasicTrajectory<T> traj = make_trajectory(p, x.rows());
  auto& proj = traj.projections;
  std::vector<T> scratch;
  auto project = [&](const std::optional<BasicMatrix<T>>& weight, const std::optional<BasicMatrix<T>>& b,
                     BasicMatrix<T>& dst, std::size_t t) {
    if (!weight) return;
    affine_row(x.row(t), *weight, *b, dst.row(t));
    normalize_row(w, dst.row(t), scratch);
  };
  for (std::size_t t = 0; t < x.rows(); ++t) {
    project(p.w_q, p.b_q, proj.q, t);
    project(p.w_k, p.b_k, proj.k, t);
    project(p.w_v, p.b_v, proj.v, t);
    project(p.w_o, p.b_o, proj.o_pre, t);
    advance(p, traj, t);
  }
  return std::move(traj.h);
}

// Backward with every weight-gradient outer product and input-gradient
// product done per step inside the loop.
template <typename T>
std::vector<T> naive_backward(const BasicCellParams<T>& p, const BasicTrajectory<T>& traj, const BasicMatrix<T>& x,
                              const BasicMatrix<T>& dH) {
  const BasicProjectionGrads<T> pg = backward_recurrence(p, traj, dH);
  const std::size_t n = x.rows();
  const std::size_t d = p.hidden_size;
  BasicGradientSet<T> g;
  g.params = BasicCellParams<T>::zeros(p.kind, p.activation, p.input_size, d);
  g.dx = BasicMatrix<T>(n, p.input_size);
  std::vector<T> tmp(p.input_size);

  struct Route {
    const BasicMatrix<T>* weight;
    const BasicMatrix<T>* grad;
    BasicMatrix<T>* dw;
    BasicMatrix<T>* db;
  };
  std::vector<Route> routes;
  auto add_route = [&](const std::optional<BasicMatrix<T>>& weight, const BasicMatrix<T>& grad,
                       std::optional<BasicMatrix<T>>& dw, std::optional<BasicMatrix<T>>& db) {
    if (weight) routes.push_back({&*weight, &grad, &*dw, &*db});
  };
  auto& gp = g.params;
  if (p.kind == CellKind::elman) {
    add_route(p.w, pg.dwx, gp.w, gp.b);
  } else {
    add_route(p.w_q, pg.dq, gp.w_q, gp.b_q);
    add_route(p.w_k, pg.dk, gp.w_k, gp.b_k);
    add_route(p.w_v, pg.dv, gp.w_v, gp.b_v);
    add_route(p.w_o, pg.do_pre, gp.w_o, gp.b_o);
  }

  for (std::size_t t = 0; t < n; ++t) {
    auto xt = x.row(t);
    auto dxt = g.dx.row(t);
    for (const Route& r : routes) {
      auto dp = r.grad->row(t);
      for (std::size_t i = 0; i < xt.size(); ++i) {
        auto dst = r.dw->row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += xt[i] * dp[j];
      }
      auto db = r.db->row(0);
      for (std::size_t j = 0; j < d; ++j) db[j] += dp[j];
      vecmat_t(dp, *r.weight, std::span<T>(tmp));
      for (std::size_t i = 0; i < tmp.size(); ++i) dxt[i] += tmp[i];
    }
    if (p.kind == CellKind::elman) {
      auto hp = traj.previous_state(t);
      auto da = pg.dwx.row(t);
      for (std::size_t i = 0; i < d; ++i) {
        auto dst = gp.u->row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += hp[i] * da[j];
      }
    }
  }
  std::vector<T> out;
  g.for_each([&](std::string_view, const BasicMatrix<T>& m) { append(out, m); });
  append(out, g.dx);
  append(out, pg.dh0);
  return out;
}

template <typename T>
std::vector<T> run_lane(const Workload<T>& w, const BenchConfig& c, BenchMode mode, std::size_t lane) {
  const auto& p = w.params;
  const BasicMatrix<T>& x = w.inputs[lane];
  const bool fused = mode == BenchMode::fused;
  std::vector<T> out;

  if (c.layer_norm) {
    if (p.kind == CellKind::elman) {
      append(out, elman_layer_norm(w, x, fused));
    } else if (fused) {
      BasicProjections<T> proj = precompute_projections(x, p);
      normalize_rows(w, proj.q);
      normalize_rows(w, proj.k);
      normalize_rows(w, proj.v);
      normalize_rows(w, proj.o_pre);
      append(out, forward_from_projections(p, std::move(proj)).h);
    } else {
      append(out, lrn_layer_norm_naive(w, x));
    }
    return out;
  }

  const BasicTrajectory<T> traj = fused ? forward_sequence(p, x) : forward_sequence_naive(p, x);
  append(out, traj.h);
  if (!c.backward) return out;
  const BasicMatrix<T> dH(x.rows(), p.hidden_size, T{1});
  if (fused) {
    const BasicGradientSet<T> g = backward_sequence(p, traj, dH);
    g.for_each([&](std::string_view, const BasicMatrix<T>& m) { append(out, m); });
    append(out, g.dx);
    append(out, g.dh0);
  } else {
    const std::vector<T> grads = naive_backward(p, traj, x, dH);
    out.insert(out.end(), grads.begin(), grads.end());
  }
  return out;
}

template <typename T>
std::vector<std::vector<T>> run_batch(const Workload<T>& w, const BenchConfig& c, BenchMode mode) {
  std::vector<std::vector<T>> outputs(c.batch);
  parallel_for(c.batch, [&](std::size_t lane) { outputs[lane] = run_lane(w, c, mode, lane); });
  return outputs;
}

std::string describe_environment() {
  std::string env = "compiler ";
#if defined(__clang__)
  env += "clang " __clang_version__;
#elif defined(__GNUC__)
  env += "gcc " __VERSION__;
#else
  env += "unknown";
#endif
  env += "; hardware threads " + std::to_string(std::thread::hardware_concurrency());
  env += "; workers " + std::to_string(worker_count());
  return env;
}

template <typename T>
BenchReport run_typed(const BenchConfig& c) {
  Rng rng(c.seed);
  Workload<T> w;
  w.params = BasicCellParams<double>::initialize(c.kind, Activation::tanh, c.d, c.d, rng).template cast<T>();
  for (std::size_t lane = 0; lane < c.batch; ++lane) {
    w.inputs.push_back(random_normal<double>(c.n, c.d, rng).template cast<T>());
  }
  w.gain = BasicMatrix<T>(1, c.d, T{1});
  w.bias = BasicMatrix<T>(1, c.d, T{0});

  BenchReport report;
  report.config = c;
  report.partial_fusion = c.kind == CellKind::elman;
  report.environment = describe_environment();

  // Equivalence gate.
  const auto fused = run_batch(w, c, BenchMode::fused);
  const auto naive = run_batch(w, c, BenchMode::naive);
  double worst = 0.0;
  for (std::size_t lane = 0; lane < c.batch; ++lane) {
    if (fused[lane].size() != naive[lane].size()) throw BenchError("bench: fused and naive outputs differ in size");
    for (std::size_t i = 0; i < fused[lane].size(); ++i) {
      const double diff = std::abs(static_cast<double>(fused[lane][i]) - static_cast<double>(naive[lane][i]));
      if (!(diff <= worst)) worst = std::isnan(diff) ? diff : std::max(worst, diff);
    }
  }
  report.equivalence_error = worst;
  if (!(worst <= kBenchEquivalenceTolerance)) {
    throw BenchError("bench: fused and naive outputs differ by " + std::to_string(worst) + "; timings withheld");
  }

  for (std::size_t i = 0; i < c.warmups; ++i) run_batch(w, c, c.mode);
  for (std::size_t i = 0; i < c.repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const auto out = run_batch(w, c, c.mode);
    const auto stop = std::chrono::steady_clock::now();
    if (out.size() != c.batch) throw BenchError("bench: lane outputs missing");
    report.seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  report.median_seconds = median(report.seconds);
  report.steps_per_second = static_cast<double>(c.batch * c.n) / report.median_seconds;
  return report;
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
  config.validate();
  return config.precision == Precision::f32 ? run_typed<float>(config) : run_typed<double>(config);
}

nlohmann::json to_json(const BenchReport& r) {
  const BenchConfig& c = r.config;
  return nlohmann::json{{"cell", std::string(to_string(c.kind))},
                        {"mode", std::string(to_string(c.mode))},
                        {"d", c.d},
                        {"n", c.n},
                        {"batch", c.batch},
                        {"precision", std::string(to_string(c.precision))},
                        {"repeats", c.repeats},
                        {"warmups", c.warmups},
                        {"layer_norm", c.layer_norm},
                        {"backward", c.backward},
                        {"seed", c.seed},
                        {"partial_fusion", r.partial_fusion},
                        {"equivalence_error", r.equivalence_error},
                        {"seconds", r.seconds},
                        {"median_seconds", r.median_seconds},
                        {"steps_per_second", r.steps_per_second},
                        {"environment", r.environment}};
}

}  // namespace lrn

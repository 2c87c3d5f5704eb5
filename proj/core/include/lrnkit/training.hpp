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


// Losses, gradient clipping, optimizers and the BPTT training loop.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrnkit/cells.hpp"
#include "lrnkit/model.hpp"
#include "lrnkit/tasks.hpp"

namespace lrn {

struct LossGrad {
  double loss = 0.0;
  Matrix grad;  // same shape as the prediction
};

/// Max-shifted softmax over a 1×C row. Throws std::out_of_range for a bad label.
LossGrad softmax_cross_entropy(const Matrix& logits, int label);

/// Mean squared error over a 1×k row.
LossGrad mse_loss(const Matrix& pred, const Matrix& target);

/// ℓ2 norm over every matrix of a parameter-shaped object (anything with
/// for_each(name, matrix)).
template <typename G>
double global_norm(const G& grads) {
  double sq = 0.0;
  grads.for_each([&](std::string_view, const Matrix& m) { sq += squared_norm(m); });
  return std::sqrt(sq);
}

template <typename G>
struct Clipped {
  G grads;
  double scale = 1.0;
  double norm = 0.0;  // before clipping
};

/// Rescales all gradients by limit/‖g‖ when ‖g‖ > limit.
template <typename G>
Clipped<G> clip_by_global_norm(G grads, double limit) {
  if (!(limit > 0.0)) throw std::invalid_argument("clip_by_global_norm: limit must be positive");
  Clipped<G> out;
  out.norm = global_norm(grads);
  if (out.norm > limit) {
    out.scale = limit / out.norm;
    grads.for_each([&](std::string_view, Matrix& m) { scale_in_place(m, out.scale); });
  }
  out.grads = std::move(grads);
  return out;
}

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<Matrix> m, v;  // Adam moments, in for_each order; created on first use
  std::uint64_t step = 0;
};

/// One update of `params` from `grads` (same layout). SGD: θ −= lr·g.
/// Adam: bias-corrected moments, θ −= lr·m̂/(√v̂ + ε).
template <typename P>
void optimizer_update(OptimizerState& state, P& params, const P& grads) {
  std::vector<const Matrix*> g;
  grads.for_each([&](std::string_view, const Matrix& m) { g.push_back(&m); });
  std::vector<Matrix*> p;
  params.for_each([&](std::string_view, Matrix& m) { p.push_back(&m); });
  if (g.size() != p.size()) throw ShapeError("optimizer_update: gradient layout does not match parameters");
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j]->rows() != g[j]->rows() || p[j]->cols() != g[j]->cols()) {
      throw ShapeError("optimizer_update: gradient " + shape_string(*g[j]) + " for parameter " + shape_string(*p[j]));
    }
  }
  ++state.step;
  if (state.kind == OptimizerKind::sgd) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      auto pv = p[j]->values();
      auto gv = g[j]->values();
      for (std::size_t e = 0; e < pv.size(); ++e) pv[e] -= state.lr * gv[e];
    }
    return;
  }
  if (state.m.empty()) {
    for (const Matrix* m : g) {
      state.m.emplace_back(m->rows(), m->cols());
      state.v.emplace_back(m->rows(), m->cols());
    }
  }
  if (state.m.size() != p.size()) throw ShapeError("optimizer_update: moment layout does not match parameters");
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t j = 0; j < p.size(); ++j) {
    auto pv = p[j]->values();
    auto gv = g[j]->values();
    auto mv = state.m[j].values();
    auto vv = state.v[j].values();
    for (std::size_t e = 0; e < pv.size(); ++e) {
      mv[e] = state.beta1 * mv[e] + (1.0 - state.beta1) * gv[e];
      vv[e] = state.beta2 * vv[e] + (1.0 - state.beta2) * gv[e] * gv[e];
      const double m_hat = mv[e] / correction1;
      const double v_hat = vv[e] / correction2;
      pv[e] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

struct TrainConfig {
  TaskId task = TaskId::adding;
  CellKind kind = CellKind::lrn;
  Activation activation = Activation::tanh;
  std::size_t hidden = 64;
  std::size_t layers = 1;
  std::size_t batch = 32;
  std::size_t max_steps = 1000;
  double lr = 1e-3;
  double clip_norm = 5.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 1;
  std::size_t eval_interval = 100;
  std::size_t eval_examples = 256;  // adding, copy, toysent; charlm evaluates every held-out window up to this count
  std::size_t length = 100;         // adding: n; copy: blank span; charlm: window
  std::size_t copy_payload = 5;
  std::size_t alphabet = 8;
  std::size_t embed_dim = 32;
  std::filesystem::path corpus;  // empty: bundled corpus
  /// Stop at the first evaluation that meets this value (≤ for mse/loss,
  /// ≥ for accuracy).
  std::optional<double> target_metric;

  /// Throws std::invalid_argument on zero counts or a non-positive clip norm.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& doc);

/// "mse" (adding), "accuracy" (copy, toysent) or "loss" (charlm, nats/byte).
std::string metric_name(TaskId task);
bool lower_is_better(TaskId task);

struct MetricsRecord {
  std::size_t step = 0;
  double loss = 0.0;  // mean training loss since the previous record
  std::string metric_name;
  double metric = 0.0;
};

nlohmann::json to_json(const MetricsRecord& record);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  Model model;
  std::vector<MetricsRecord> records;
  std::size_t steps = 0;
  double final_metric = 0.0;
  bool reached_target = false;
};

/// Held-out examples for the config: a fixed stream disjoint from training
/// (adding, copy, toysent) or the tiled evaluation split (charlm).
std::vector<TaskInstance> eval_set(const TrainConfig& config);

/// Training examples for update `step` (0-based).
std::vector<TaskInstance> train_batch(const TrainConfig& config, std::size_t step, const CharCorpus* corpus);

/// Task metric over `examples`. Reduction order is fixed.
double evaluate(const Model& model, const std::vector<TaskInstance>& examples);

/// Mean batch loss and its gradient (mean over examples).
std::pair<double, Model> batch_gradient(const Model& model, const std::vector<TaskInstance>& batch);

/// Builds the model from the seed and trains it. `on_record` receives each
/// evaluation as it happens. Throws TrainingDiverged on a non-finite loss.
TrainResult train(const TrainConfig& config, const std::function<void(const MetricsRecord&)>& on_record = {});

/// Model checkpoint: {"task", "layers": [cell documents], "embedding",
/// "head_weight", "head_bias", "config"}.
nlohmann::json model_to_json(const Model& model, const TrainConfig& config);
Model model_from_json(const nlohmann::json& doc, TrainConfig* config = nullptr);
void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig& config);
Model load_checkpoint(const std::filesystem::path& path, TrainConfig* config = nullptr);

}  // namespace lrn

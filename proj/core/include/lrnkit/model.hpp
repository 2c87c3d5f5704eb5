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


// A stack of cells with an optional input embedding and an affine readout,
// wired to the task layouts in tasks.hpp.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrnkit/cells.hpp"
#include "lrnkit/tasks.hpp"

namespace lrn {

struct ModelShape {
  TaskId task = TaskId::adding;
  CellKind kind = CellKind::lrn;
  Activation activation = Activation::tanh;
  std::size_t input_size = 0;  // raw feature width, or embedding width when vocab > 0
  std::size_t vocab = 0;       // 0: inputs are feature rows
  std::size_t hidden = 0;
  std::size_t layers = 1;
  std::size_t outputs = 0;
};

struct Model {
  TaskId task = TaskId::adding;
  std::optional<Matrix> embedding;  // vocab × input_size
  std::vector<CellParams> layers;
  Matrix head_w;  // d × outputs
  Matrix head_b;  // 1 × outputs

  /// Glorot weights everywhere except the zero biases; embedding entries
  /// standard normal scaled by 0.1.
  static Model create(const ModelShape& shape, Rng& rng);
  /// Same layout with every matrix zero.
  Model zeros_like() const;

  bool regression() const { return task == TaskId::adding; }
  std::size_t outputs() const { return head_w.cols(); }
  std::size_t parameter_count() const;

  /// Visits every matrix as (name, matrix): "embedding", "layer<l>.<param>",
  /// "head_w", "head_b".
  template <typename F>
  void for_each(F&& fn) {
    visit(*this, fn);
  }
  template <typename F>
  void for_each(F&& fn) const {
    visit(*this, fn);
  }

  bool operator==(const Model&) const = default;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& fn) {
    if (self.embedding) fn(std::string_view("embedding"), *self.embedding);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      const std::string prefix = "layer" + std::to_string(l) + ".";
      self.layers[l].for_each([&](std::string_view name, auto& m) { fn(std::string_view(prefix + std::string(name)), m); });
    }
    fn(std::string_view("head_w"), self.head_w);
    fn(std::string_view("head_b"), self.head_b);
  }
};

/// Input layout each task needs. `embed_dim` applies to token tasks and
/// `alphabet` to copy.
ModelShape task_shape(TaskId task, CellKind kind, Activation activation, std::size_t hidden, std::size_t layers,
                      std::size_t embed_dim, std::size_t alphabet);

/// Outcome of one example. `loss` is the mean over the example's targets.
struct ExampleStats {
  double loss = 0.0;
  std::size_t targets = 0;
  std::size_t correct = 0;  // classification only
};

/// Per-layer trajectories for one example.
std::vector<Trajectory> run_layers(const Model& model, const TaskInstance& example);

/// Head outputs (one row per label, or a single row for regression).
Matrix model_outputs(const Model& model, const TaskInstance& example);

/// Loss of one example. When `grads` is non-null (shaped like the model) the
/// example's gradient scaled by `grad_scale` is added to it.
ExampleStats example_loss(const Model& model, const TaskInstance& example, Model* grads = nullptr,
                          double grad_scale = 1.0);

}  // namespace lrn

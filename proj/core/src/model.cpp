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


#include "lrnkit/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "lrnkit/training.hpp"

namespace lrn {

ModelShape task_shape(TaskId task, CellKind kind, Activation activation, std::size_t hidden, std::size_t layers,
                      std::size_t embed_dim, std::size_t alphabet) {
  ModelShape shape;
  shape.task = task;
  shape.kind = kind;
  shape.activation = activation;
  shape.hidden = hidden;
  shape.layers = layers;
  switch (task) {
    case TaskId::adding:
      shape.input_size = 2;
      shape.outputs = 1;
      break;
    case TaskId::copy:
      shape.input_size = alphabet + 2;
      shape.outputs = alphabet;
      break;
    case TaskId::toysent:
      shape.vocab = kToyVocabSize;
      shape.input_size = embed_dim;
      shape.outputs = 2;
      break;
    case TaskId::charlm:
      shape.vocab = 256;
      shape.input_size = embed_dim;
      shape.outputs = 256;
      break;
  }
  return shape;
}

Model Model::create(const ModelShape& shape, Rng& rng) {
  if (shape.layers == 0 || shape.hidden == 0 || shape.input_size == 0 || shape.outputs == 0) {
    throw std::invalid_argument("model: layers, hidden, input and output sizes must be positive");
  }
  Model m;
  m.task = shape.task;
  if (shape.vocab > 0) m.embedding = random_normal<double>(shape.vocab, shape.input_size, rng, 0.1);
  for (std::size_t l = 0; l < shape.layers; ++l) {
    const std::size_t d_in = l == 0 ? shape.input_size : shape.hidden;
    m.layers.push_back(CellParams::initialize(shape.kind, shape.activation, d_in, shape.hidden, rng));
  }
  m.head_w = glorot_uniform<double>(shape.hidden, shape.outputs, rng);
  m.head_b = Matrix(1, shape.outputs);
  return m;
}

Model Model::zeros_like() const {
  Model z = *this;
  z.for_each([](std::string_view, Matrix& m) { m = Matrix(m.rows(), m.cols()); });
  return z;
}

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for_each([&](std::string_view, const Matrix& m) { total += m.size(); });
  return total;
}

namespace {

Matrix layer_input(const Model& model, const TaskInstance& example) {
  if (!model.embedding) {
    if (example.inputs.empty()) throw std::invalid_argument("model: example has no feature rows");
    return example.inputs;
  }
  const Matrix& table = *model.embedding;
  Matrix x(example.tokens.size(), table.cols());
  for (std::size_t t = 0; t < example.tokens.size(); ++t) {
    const int token = example.tokens[t];
    if (token < 0 || static_cast<std::size_t>(token) >= table.rows()) {
      throw std::out_of_range("model: token " + std::to_string(token) + " outside the embedding table");
    }
    x.set_row(t, table.row(static_cast<std::size_t>(token)));
  }
  return x;
}

void accumulate(CellParams& into, const CellParams& delta) {
  std::vector<const Matrix*> parts;
  delta.for_each([&](std::string_view, const Matrix& m) { parts.push_back(&m); });
  std::size_t slot = 0;
  into.for_each([&](std::string_view, Matrix& m) { add_in_place(m, *parts.at(slot++)); });
}

Matrix gather_label_rows(const Matrix& h, const std::vector<Label>& labels) {
  Matrix out(labels.size(), h.cols());
  for (std::size_t r = 0; r < labels.size(); ++r) out.set_row(r, h.row(labels[r].position));
  return out;
}

}  // namespace

std::vector<Trajectory> run_layers(const Model& model, const TaskInstance& example) {
  std::vector<Trajectory> trajs;
  trajs.reserve(model.layers.size());
  Matrix x = layer_input(model, example);
  for (const CellParams& layer : model.layers) {
    trajs.push_back(forward_sequence(layer, x));
    x = trajs.back().h;
  }
  return trajs;
}

Matrix model_outputs(const Model& model, const TaskInstance& example) {
  const Trajectory top = std::move(run_layers(model, example).back());
  const Matrix rows = model.regression() ? top.final_state() : gather_label_rows(top.h, example.labels);
  return add_row(matmul(rows, model.head_w), model.head_b);
}

ExampleStats example_loss(const Model& model, const TaskInstance& example, Model* grads, double grad_scale) {
  const std::vector<Trajectory> trajs = run_layers(model, example);
  const Trajectory& top = trajs.back();
  const std::size_t n = top.length();
  const std::size_t d = top.hidden_size();
  if (n == 0) throw std::invalid_argument("model: empty example");

  ExampleStats stats;
  Matrix dH(n, d);
  if (model.regression()) {
    const Matrix h = top.final_state();
    const Matrix pred = add_row(matmul(h, model.head_w), model.head_b);
    const LossGrad lg = mse_loss(pred, example.target);
    stats.loss = lg.loss;
    stats.targets = 1;
    if (grads) {
      const Matrix dpred = scale(lg.grad, grad_scale);
      matmul_accumulate(transpose(h), dpred, grads->head_w);
      add_in_place(grads->head_b, dpred);
      dH.set_row(n - 1, matmul_nt(dpred, model.head_w).row(0));
    }
  } else {
    const std::size_t m = example.labels.size();
    if (m == 0) throw std::invalid_argument("model: classification example without labels");
    const Matrix rows = gather_label_rows(top.h, example.labels);
    const Matrix logits = add_row(matmul(rows, model.head_w), model.head_b);
    Matrix dlogits(m, logits.cols());
    double total = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const LossGrad lg = softmax_cross_entropy(logits.row_matrix(r), example.labels[r].target);
      total += lg.loss;
      const auto row = logits.row(r);
      const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == example.labels[r].target) ++stats.correct;
      const double w = grad_scale / static_cast<double>(m);
      for (std::size_t c = 0; c < logits.cols(); ++c) dlogits(r, c) = lg.grad(0, c) * w;
    }
    stats.loss = total / static_cast<double>(m);
    stats.targets = m;
    if (grads) {
      add_in_place(grads->head_w, matmul_tn(rows, dlogits));
      add_in_place(grads->head_b, sum_rows(dlogits));
      const Matrix drows = matmul_nt(dlogits, model.head_w);
      for (std::size_t r = 0; r < m; ++r) {
        auto dst = dH.row(example.labels[r].position);
        auto src = drows.row(r);
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
      }
    }
  }
  if (!grads) return stats;

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    GradientSet g = backward_sequence(model.layers[l], trajs[l], dH);
    accumulate(grads->layers[l], g.params);
    dH = std::move(g.dx);
  }
  if (model.embedding) {
    for (std::size_t t = 0; t < n; ++t) {
      auto dst = grads->embedding->row(static_cast<std::size_t>(example.tokens[t]));
      auto src = dH.row(t);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
  return stats;
}

}  // namespace lrn

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


#include "lrnkit/training.hpp"

#include <algorithm>
#include <limits>

#include "lrnkit/checkpoint.hpp"
#include "lrnkit/parallel.hpp"
#include "lrnkit/rng.hpp"

namespace lrn {

using nlohmann::json;

namespace {

// Stream indices for Rng::for_stream. Training example j of update s uses
// s·batch + j, far below both offsets.
constexpr std::uint64_t kEvalStream = std::uint64_t{1} << 62;
constexpr std::uint64_t kInitStream = (std::uint64_t{1} << 62) + (std::uint64_t{1} << 61);

}  // namespace

LossGrad softmax_cross_entropy(const Matrix& logits, int label) {
  if (logits.rows() != 1 || logits.cols() < 2) {
    throw ShapeError("softmax_cross_entropy: logits are " + shape_string(logits) + ", expected 1×C with C ≥ 2");
  }
  const std::size_t classes = logits.cols();
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) + " outside [0, " +
                            std::to_string(classes) + ")");
  }
  const auto row = logits.row(0);
  const double peak = *std::max_element(row.begin(), row.end());
  LossGrad out;
  out.grad = Matrix(1, classes);
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    out.grad(0, c) = std::exp(row[c] - peak);
    total += out.grad(0, c);
  }
  for (std::size_t c = 0; c < classes; ++c) out.grad(0, c) /= total;
  const auto y = static_cast<std::size_t>(label);
  out.loss = std::log(total) - (row[y] - peak);
  out.grad(0, y) -= 1.0;
  return out;
}

LossGrad mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != 1 || target.rows() != 1 || pred.cols() != target.cols() || pred.cols() == 0) {
    throw ShapeError("mse_loss: prediction " + shape_string(pred) + " against target " + shape_string(target));
  }
  const double k = static_cast<double>(pred.cols());
  LossGrad out;
  out.grad = Matrix(1, pred.cols());
  for (std::size_t c = 0; c < pred.cols(); ++c) {
    const double diff = pred(0, c) - target(0, c);
    out.loss += diff * diff;
    out.grad(0, c) = 2.0 * diff / k;
  }
  out.loss /= k;
  return out;
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  auto positive = [](const char* name, std::size_t v) {
    if (v == 0) throw std::invalid_argument(std::string("train config: ") + name + " must be at least 1");
  };
  positive("hidden", hidden);
  positive("layers", layers);
  positive("batch", batch);
  positive("max_steps", max_steps);
  positive("eval_interval", eval_interval);
  positive("eval_examples", eval_examples);
  positive("length", length);
  if (!(clip_norm > 0.0)) throw std::invalid_argument("train config: clip norm must be positive");
  if (!(lr >= 0.0)) throw std::invalid_argument("train config: learning rate must be non-negative");
  if (task == TaskId::adding && length < 2) throw std::invalid_argument("train config: adding needs length ≥ 2");
  if (task == TaskId::copy) {
    positive("copy_payload", copy_payload);
    if (alphabet < 2) throw std::invalid_argument("train config: copy alphabet must be at least 2");
  }
  if ((task == TaskId::toysent || task == TaskId::charlm) && embed_dim == 0) {
    throw std::invalid_argument("train config: embed_dim must be at least 1");
  }
}

json to_json(const TrainConfig& c) {
  json doc{{"task", std::string(to_string(c.task))},
           {"cell", std::string(to_string(c.kind))},
           {"activation", std::string(to_string(c.activation))},
           {"hidden", c.hidden},
           {"layers", c.layers},
           {"batch", c.batch},
           {"max_steps", c.max_steps},
           {"lr", c.lr},
           {"clip_norm", c.clip_norm},
           {"optimizer", std::string(to_string(c.optimizer))},
           {"seed", c.seed},
           {"eval_interval", c.eval_interval},
           {"eval_examples", c.eval_examples},
           {"length", c.length},
           {"copy_payload", c.copy_payload},
           {"alphabet", c.alphabet},
           {"embed_dim", c.embed_dim},
           {"corpus", c.corpus.string()}};
  doc["target_metric"] = c.target_metric ? json(*c.target_metric) : json(nullptr);
  return doc;
}

TrainConfig train_config_from_json(const json& doc) {
  TrainConfig c;
  try {
    c.task = parse_task(doc.at("task").get<std::string>());
    c.kind = parse_cell_kind(doc.at("cell").get<std::string>());
    c.activation = parse_activation(doc.at("activation").get<std::string>());
    c.hidden = doc.at("hidden").get<std::size_t>();
    c.layers = doc.at("layers").get<std::size_t>();
    c.batch = doc.at("batch").get<std::size_t>();
    c.max_steps = doc.at("max_steps").get<std::size_t>();
    c.lr = doc.at("lr").get<double>();
    c.clip_norm = doc.at("clip_norm").get<double>();
    c.optimizer = parse_optimizer(doc.at("optimizer").get<std::string>());
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.eval_interval = doc.at("eval_interval").get<std::size_t>();
    c.eval_examples = doc.at("eval_examples").get<std::size_t>();
    c.length = doc.at("length").get<std::size_t>();
    c.copy_payload = doc.at("copy_payload").get<std::size_t>();
    c.alphabet = doc.at("alphabet").get<std::size_t>();
    c.embed_dim = doc.at("embed_dim").get<std::size_t>();
    c.corpus = doc.at("corpus").get<std::string>();
    if (!doc.at("target_metric").is_null()) c.target_metric = doc.at("target_metric").get<double>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("train config: ") + e.what());
  }
  return c;
}

std::string metric_name(TaskId task) {
  switch (task) {
    case TaskId::adding: return "mse";
    case TaskId::charlm: return "loss";
    default: return "accuracy";
  }
}

bool lower_is_better(TaskId task) { return task == TaskId::adding || task == TaskId::charlm; }

json to_json(const MetricsRecord& r) {
  return json{{"step", r.step}, {"loss", r.loss}, {"metric_name", r.metric_name}, {"metric", r.metric}};
}

namespace {

CharCorpus load_corpus(const TrainConfig& config) {
  return CharCorpus::load(config.corpus.empty() ? default_corpus_path() : config.corpus);
}

TaskInstance generate(const TrainConfig& config, Rng& rng) {
  switch (config.task) {
    case TaskId::adding: return gen_adding(config.length, rng);
    case TaskId::copy: return gen_copy(config.length, config.copy_payload, config.alphabet, rng);
    case TaskId::toysent: return gen_toy_sentiment(rng);
    case TaskId::charlm: break;
  }
  throw std::logic_error("generate: charlm windows come from the corpus");
}

std::vector<TaskInstance> eval_set_with(const TrainConfig& config, const CharCorpus* corpus) {
  if (config.task == TaskId::charlm) {
    auto windows = CharCorpus::tile(corpus->eval_split(), config.length);
    if (windows.size() > config.eval_examples) windows.resize(config.eval_examples);
    return windows;
  }
  std::vector<TaskInstance> out;
  out.reserve(config.eval_examples);
  for (std::size_t i = 0; i < config.eval_examples; ++i) {
    Rng rng = Rng::for_stream(config.seed, kEvalStream + i);
    out.push_back(generate(config, rng));
  }
  return out;
}

}  // namespace

std::vector<TaskInstance> eval_set(const TrainConfig& config) {
  config.validate();
  if (config.task == TaskId::charlm) {
    const CharCorpus corpus = load_corpus(config);
    return eval_set_with(config, &corpus);
  }
  return eval_set_with(config, nullptr);
}

std::vector<TaskInstance> train_batch(const TrainConfig& config, std::size_t step, const CharCorpus* corpus) {
  std::vector<TaskInstance> out;
  out.reserve(config.batch);
  for (std::size_t j = 0; j < config.batch; ++j) {
    Rng rng = Rng::for_stream(config.seed, static_cast<std::uint64_t>(step) * config.batch + j);
    if (config.task == TaskId::charlm) {
      if (!corpus) throw std::invalid_argument("train_batch: charlm needs a corpus");
      out.push_back(corpus->sample_window(config.length, rng));
    } else {
      out.push_back(generate(config, rng));
    }
  }
  return out;
}

double evaluate(const Model& model, const std::vector<TaskInstance>& examples) {
  if (examples.empty()) throw std::invalid_argument("evaluate: no examples");
  std::vector<ExampleStats> stats(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) { stats[i] = example_loss(model, examples[i]); });
  double loss = 0.0;
  std::size_t targets = 0;
  std::size_t correct = 0;
  for (const ExampleStats& s : stats) {
    loss += s.loss * static_cast<double>(s.targets);
    targets += s.targets;
    correct += s.correct;
  }
  if (model.regression() || model.task == TaskId::charlm) return loss / static_cast<double>(targets);
  return static_cast<double>(correct) / static_cast<double>(targets);
}

std::pair<double, Model> batch_gradient(const Model& model, const std::vector<TaskInstance>& batch) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  const double weight = 1.0 / static_cast<double>(batch.size());
  std::vector<Model> grads(batch.size());
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    grads[i] = model.zeros_like();
    losses[i] = example_loss(model, batch[i], &grads[i], weight).loss;
  });
  Model total = std::move(grads[0]);
  double loss = losses[0];
  for (std::size_t i = 1; i < batch.size(); ++i) {
    std::vector<const Matrix*> parts;
    grads[i].for_each([&](std::string_view, const Matrix& m) { parts.push_back(&m); });
    std::size_t slot = 0;
    total.for_each([&](std::string_view, Matrix& m) { add_in_place(m, *parts[slot++]); });
    loss += losses[i];
  }
  return {loss * weight, std::move(total)};
}

TrainResult train(const TrainConfig& config, const std::function<void(const MetricsRecord&)>& on_record) {
  config.validate();
  std::optional<CharCorpus> corpus;
  if (config.task == TaskId::charlm) corpus = load_corpus(config);
  const CharCorpus* corpus_ptr = corpus ? &*corpus : nullptr;

  Rng init = Rng::for_stream(config.seed, kInitStream);
  const ModelShape shape = task_shape(config.task, config.kind, config.activation, config.hidden, config.layers,
                                      config.embed_dim, config.alphabet);
  TrainResult result;
  result.model = Model::create(shape, init);
  const std::vector<TaskInstance> held_out = eval_set_with(config, corpus_ptr);

  OptimizerState optimizer;
  optimizer.kind = config.optimizer;
  optimizer.lr = config.lr;
  const std::string name = metric_name(config.task);
  const bool lower = lower_is_better(config.task);

  double interval_loss = 0.0;
  std::size_t interval_steps = 0;
  for (std::size_t step = 0; step < config.max_steps; ++step) {
    auto [loss, grads] = batch_gradient(result.model, train_batch(config, step, corpus_ptr));
    if (!std::isfinite(loss)) {
      throw TrainingDiverged("training diverged at step " + std::to_string(step + 1) + ": loss is " +
                             std::to_string(loss));
    }
    Clipped<Model> clipped = clip_by_global_norm(std::move(grads), config.clip_norm);
    optimizer_update(optimizer, result.model, clipped.grads);
    interval_loss += loss;
    ++interval_steps;
    result.steps = step + 1;

    if (result.steps % config.eval_interval != 0 && result.steps != config.max_steps) continue;
    MetricsRecord record;
    record.step = result.steps;
    record.loss = interval_loss / static_cast<double>(interval_steps);
    record.metric_name = name;
    record.metric = evaluate(result.model, held_out);
    interval_loss = 0.0;
    interval_steps = 0;
    result.records.push_back(record);
    result.final_metric = record.metric;
    if (on_record) on_record(record);
    if (config.target_metric) {
      const double target = *config.target_metric;
      if (lower ? record.metric <= target : record.metric >= target) {
        result.reached_target = true;
        break;
      }
    }
  }
  return result;
}

json model_to_json(const Model& model, const TrainConfig& config) {
  json layers = json::array();
  for (const CellParams& layer : model.layers) layers.push_back(cell_to_json(layer));
  json doc{{"task", std::string(to_string(model.task))},
           {"layers", layers},
           {"head_weight", matrix_to_json(model.head_w)},
           {"head_bias", matrix_to_json(model.head_b)},
           {"config", to_json(config)}};
  doc["embedding"] = model.embedding ? matrix_to_json(*model.embedding) : json(nullptr);
  return doc;
}

Model model_from_json(const json& doc, TrainConfig* config) {
  Model model;
  try {
    model.task = parse_task(doc.at("task").get<std::string>());
    for (const json& layer : doc.at("layers")) model.layers.push_back(cell_from_json(layer));
    if (!doc.at("embedding").is_null()) model.embedding = matrix_from_json(doc.at("embedding"), "embedding");
    model.head_w = matrix_from_json(doc.at("head_weight"), "head_weight");
    model.head_b = matrix_from_json(doc.at("head_bias"), "head_bias");
    if (config) *config = train_config_from_json(doc.at("config"));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("model checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("model checkpoint: ") + e.what());
  }
  if (model.layers.empty()) throw CheckpointError("model checkpoint: no layers");
  const std::size_t d = model.layers.back().hidden_size;
  if (model.head_w.rows() != d || model.head_b.rows() != 1 || model.head_b.cols() != model.head_w.cols()) {
    throw CheckpointError("model checkpoint: head shapes do not match the top layer");
  }
  for (std::size_t l = 1; l < model.layers.size(); ++l) {
    if (model.layers[l].input_size != model.layers[l - 1].hidden_size) {
      throw CheckpointError("model checkpoint: layer " + std::to_string(l) + " input width mismatch");
    }
  }
  if (model.embedding && model.embedding->cols() != model.layers.front().input_size) {
    throw CheckpointError("model checkpoint: embedding width does not match the first layer");
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig& config) {
  write_json_file(path, model_to_json(model, config));
}

Model load_checkpoint(const std::filesystem::path& path, TrainConfig* config) {
  return model_from_json(read_json_file(path), config);
}

}  // namespace lrn

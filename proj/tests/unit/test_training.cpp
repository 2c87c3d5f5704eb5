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

#include <cmath>
#include <filesystem>

#include "lrnkit/training.hpp"
#include "oracles.hpp"

namespace lrn {
namespace {

TrainConfig small_config(TaskId task) {
  TrainConfig c;
  c.task = task;
  c.hidden = 6;
  c.batch = 4;
  c.max_steps = 6;
  c.eval_interval = 2;
  c.eval_examples = 16;
  c.length = task == TaskId::charlm ? 16 : 10;
  c.copy_payload = 2;
  c.alphabet = 3;
  c.embed_dim = 4;
  c.seed = 5;
  return c;
}

Model small_model(TaskId task, CellKind kind, std::size_t layers, std::uint64_t seed) {
  Rng rng(seed);
  Model m = Model::create(task_shape(task, kind, Activation::tanh, 3, layers, 3, 3), rng);
  m.for_each([&](std::string_view name, Matrix& p) {
    if (name == "head_b" || name.back() == 'b' || name.ends_with(".b_q") || name.ends_with(".b_k") ||
        name.ends_with(".b_v") || name.ends_with(".b_o")) {
      p = random_normal<double>(p.rows(), p.cols(), rng, 0.3);
    }
  });
  return m;
}

TEST(Clip, UnderLimitUnchanged) {
  CellParams g = CellParams::zeros(CellKind::elman, Activation::tanh, 1, 1);
  *g.w = Matrix::from_rows({{3.0}});
  const auto clipped = clip_by_global_norm(g, 5.0);
  EXPECT_EQ(clipped.scale, 1.0);
  EXPECT_EQ(clipped.norm, 3.0);
  EXPECT_EQ(clipped.grads, g);
}

TEST(Clip, OverLimitHalved) {
  CellParams g = CellParams::zeros(CellKind::elman, Activation::tanh, 1, 1);
  *g.w = Matrix::from_rows({{6.0}});
  *g.u = Matrix::from_rows({{8.0}});
  const auto clipped = clip_by_global_norm(g, 5.0);
  EXPECT_EQ(clipped.scale, 0.5);
  EXPECT_EQ((*clipped.grads.w)(0, 0), 3.0);
  EXPECT_EQ((*clipped.grads.u)(0, 0), 4.0);
}

TEST(Clip, PostClipNormIsMinOfNormAndLimit) {
  Rng rng(1);
  for (double sd : {0.01, 0.5, 3.0}) {
    CellParams g = CellParams::initialize(CellKind::olrn, Activation::tanh, 5, 7, rng);
    g.for_each([&](std::string_view, Matrix& m) { m = random_normal<double>(m.rows(), m.cols(), rng, sd); });
    double sq = 0.0;
    g.for_each([&](std::string_view, const Matrix& m) {
      for (double v : m.values()) sq += v * v;
    });
    const auto clipped = clip_by_global_norm(g, 5.0);
    EXPECT_NEAR(global_norm(clipped.grads), std::min(std::sqrt(sq), 5.0), 1e-12);
  }
  EXPECT_THROW(clip_by_global_norm(CellParams{}, 0.0), std::invalid_argument);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Rng rng(2);
  CellParams p = CellParams::initialize(CellKind::lrn, Activation::tanh, 3, 3, rng);
  const CellParams before = p;
  OptimizerState state;
  optimizer_update(state, p, CellParams::zeros(CellKind::lrn, Activation::tanh, 3, 3));
  EXPECT_EQ(p, before);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstTwoStepsMatchHandComputation) {
  CellParams p = CellParams::zeros(CellKind::elman, Activation::tanh, 1, 1);
  *p.w = Matrix::from_rows({{0.5}});
  CellParams g = CellParams::zeros(CellKind::elman, Activation::tanh, 1, 1);
  *g.w = Matrix::from_rows({{0.2}});
  OptimizerState state;
  state.lr = 0.01;

  double theta = 0.5, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = 0.9 * m + 0.1 * 0.2;
    v = 0.999 * v + 0.001 * 0.04;
    const double m_hat = m / (1.0 - std::pow(0.9, t));
    const double v_hat = v / (1.0 - std::pow(0.999, t));
    theta -= 0.01 * m_hat / (std::sqrt(v_hat) + 1e-8);
    optimizer_update(state, p, g);
    EXPECT_NEAR((*p.w)(0, 0), theta, 1e-15) << "step " << t;
  }
  EXPECT_NEAR(theta, 0.48, 1e-8);
  EXPECT_EQ(state.step, 2u);
}

TEST(Adam, DeterministicAndShapeChecked) {
  Rng rng(3);
  const CellParams init = CellParams::initialize(CellKind::glrn, Activation::tanh, 3, 4, rng);
  CellParams g = init;
  g.for_each([&](std::string_view, Matrix& m) { m = random_normal<double>(m.rows(), m.cols(), rng); });
  CellParams a = init, b = init;
  OptimizerState sa, sb;
  for (int i = 0; i < 2; ++i) {
    optimizer_update(sa, a, g);
    optimizer_update(sb, b, g);
  }
  EXPECT_EQ(a, b);
  CellParams wrong = CellParams::zeros(CellKind::glrn, Activation::tanh, 3, 5);
  EXPECT_THROW(optimizer_update(sa, a, wrong), ShapeError);
}

TEST(Sgd, PlainStep) {
  CellParams p = CellParams::zeros(CellKind::elman, Activation::tanh, 1, 1);
  CellParams g = p;
  *g.b = Matrix::from_rows({{2.0}});
  OptimizerState state;
  state.kind = OptimizerKind::sgd;
  state.lr = 0.25;
  optimizer_update(state, p, g);
  EXPECT_EQ((*p.b)(0, 0), -0.5);
}

TEST(CrossEntropy, UniformLogits) {
  const LossGrad lg = softmax_cross_entropy(Matrix(1, 4, 0.3), 2);
  EXPECT_NEAR(lg.loss, std::log(4.0), 1e-15);
  EXPECT_NEAR(lg.grad(0, 2), -0.75, 1e-15);
  EXPECT_NEAR(lg.grad(0, 0), 0.25, 1e-15);
}

TEST(CrossEntropy, DominantLogit) {
  EXPECT_LT(softmax_cross_entropy(Matrix::from_rows({{0, 0, 60, 0}}), 2).loss, 1e-20);
  const LossGrad huge = softmax_cross_entropy(Matrix::from_rows({{1000, 0}}), 1);
  EXPECT_NEAR(huge.loss, 1000.0, 1e-9);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  Matrix logits = random_normal<double>(1, 7, rng, 2.0);
  const LossGrad lg = softmax_cross_entropy(logits, 3);
  const Matrix fd = oracle::fd_gradient(logits, [&] { return softmax_cross_entropy(logits, 3).loss; });
  EXPECT_LE(max_abs_diff(fd, lg.grad), 1e-6);
}

TEST(CrossEntropy, LabelOutOfRange) {
  EXPECT_THROW(softmax_cross_entropy(Matrix(1, 3), 3), std::out_of_range);
  EXPECT_THROW(softmax_cross_entropy(Matrix(1, 3), -1), std::out_of_range);
}

TEST(Mse, Examples) {
  const Matrix p = Matrix::from_rows({{0.3, -1.0}});
  EXPECT_EQ(mse_loss(p, p).loss, 0.0);
  const LossGrad lg = mse_loss(Matrix(1, 1), Matrix(1, 1, 1.0));
  EXPECT_EQ(lg.loss, 1.0);
  EXPECT_EQ(lg.grad(0, 0), -2.0);
  EXPECT_THROW(mse_loss(Matrix(1, 2), Matrix(1, 3)), ShapeError);
}

TEST(Mse, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  Matrix pred = random_normal<double>(1, 5, rng);
  const Matrix target = random_normal<double>(1, 5, rng);
  const Matrix fd = oracle::fd_gradient(pred, [&] { return mse_loss(pred, target).loss; });
  EXPECT_LE(max_abs_diff(fd, mse_loss(pred, target).grad), 1e-8);
}

TEST(ModelGradient, MatchesFiniteDifferencesForEachTask) {
  Rng rng(6);
  std::vector<std::pair<TaskId, TaskInstance>> cases;
  cases.emplace_back(TaskId::adding, gen_adding(6, rng));
  cases.emplace_back(TaskId::copy, gen_copy(3, 2, 3, rng));
  cases.emplace_back(TaskId::toysent, gen_toy_sentiment(rng));
  cases.emplace_back(TaskId::charlm, CharCorpus::tile("abcab cabba", 5)[0]);
  for (auto& [task, example] : cases) {
    for (CellKind kind : {CellKind::lrn, CellKind::olrn, CellKind::elman}) {
      for (std::size_t layers : {1u, 2u}) {
        Model model = small_model(task, kind, layers, 7);
        Model grads = model.zeros_like();
        example_loss(model, example, &grads);
        std::vector<const Matrix*> analytic;
        grads.for_each([&](std::string_view, const Matrix& m) { analytic.push_back(&m); });
        std::size_t idx = 0;
        model.for_each([&](std::string_view name, Matrix& m) {
          const Matrix fd = oracle::fd_gradient(m, [&] { return example_loss(model, example).loss; });
          EXPECT_LE(max_abs_diff(fd, *analytic[idx++]), 1e-6)
              << to_string(task) << "/" << to_string(kind) << "/" << layers << " " << name;
        });
      }
    }
  }
}

TEST(Train, ZeroLearningRateFreezesModel) {
  TrainConfig c = small_config(TaskId::adding);
  c.lr = 0.0;
  const TrainResult result = train(c);
  ASSERT_EQ(result.records.size(), 3u);
  for (const MetricsRecord& r : result.records) EXPECT_EQ(r.metric, result.records[0].metric);
  Rng rng = Rng::for_stream(c.seed, (std::uint64_t{1} << 62) + (std::uint64_t{1} << 61));
  const Model initial = Model::create(task_shape(c.task, c.kind, c.activation, c.hidden, c.layers, c.embed_dim,
                                                 c.alphabet),
                                      rng);
  EXPECT_EQ(result.model, initial);
  const auto batch = train_batch(c, 0, nullptr);
  EXPECT_EQ(batch_gradient(result.model, batch).first, batch_gradient(initial, batch).first);
}

TEST(Train, SameSeedSameMetricStream) {
  for (TaskId task : {TaskId::adding, TaskId::copy, TaskId::toysent, TaskId::charlm}) {
    const TrainConfig c = small_config(task);
    const TrainResult a = train(c);
    const TrainResult b = train(c);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      EXPECT_EQ(to_json(a.records[i]), to_json(b.records[i])) << to_string(task);
    }
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.records.back().metric_name, metric_name(task));
  }
}

TEST(Train, SmallStepDoesNotIncreaseBatchLoss) {
  TrainConfig c = small_config(TaskId::adding);
  int non_increasing = 0;
  for (std::size_t s = 0; s < 20; ++s) {
    Rng rng(100 + s);
    Model model = Model::create(task_shape(c.task, c.kind, c.activation, 8, 1, 0, 0), rng);
    const auto batch = train_batch(c, s, nullptr);
    auto [loss, grads] = batch_gradient(model, batch);
    OptimizerState state;
    state.lr = 1e-4;
    optimizer_update(state, model, clip_by_global_norm(std::move(grads), 5.0).grads);
    if (batch_gradient(model, batch).first <= loss) ++non_increasing;
  }
  EXPECT_GE(non_increasing, 18);
}

TEST(Train, NonFiniteLossAborts) {
  TrainConfig c = small_config(TaskId::adding);
  c.activation = Activation::identity;
  c.kind = CellKind::elman;
  c.lr = 1e200;
  c.clip_norm = 1e300;
  c.max_steps = 50;
  EXPECT_THROW(train(c), TrainingDiverged);
}

TEST(Train, TargetStopsEarly) {
  TrainConfig c = small_config(TaskId::adding);
  c.max_steps = 100;
  c.target_metric = 1e9;
  const TrainResult result = train(c);
  EXPECT_TRUE(result.reached_target);
  EXPECT_EQ(result.steps, c.eval_interval);
}

TEST(Train, ConfigValidation) {
  TrainConfig c = small_config(TaskId::adding);
  c.batch = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config(TaskId::adding);
  c.clip_norm = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const TrainConfig ok = small_config(TaskId::copy);
  EXPECT_EQ(to_json(train_config_from_json(to_json(ok))), to_json(ok));
}

TEST(Checkpoint, RoundTripReproducesEvaluation) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "lrnkit_train_ckpt";
  std::filesystem::create_directories(dir);
  for (TaskId task : {TaskId::adding, TaskId::toysent}) {
    const TrainConfig c = small_config(task);
    const TrainResult result = train(c);
    const auto path = dir / (std::string(to_string(task)) + ".json");
    save_checkpoint(path, result.model, c);
    TrainConfig loaded_config;
    const Model loaded = load_checkpoint(path, &loaded_config);
    EXPECT_EQ(loaded, result.model);
    const auto examples = eval_set(c);
    EXPECT_EQ(evaluate(loaded, examples), evaluate(result.model, examples));
    EXPECT_EQ(evaluate(loaded, examples), result.final_metric);
    EXPECT_EQ(to_json(loaded_config), to_json(c));
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lrn

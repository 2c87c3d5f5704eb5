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
#include <fstream>

#include "lrnkit/tasks.hpp"
#include "lrnkit/training.hpp"

namespace lrn {
namespace {

TEST(Adding, LayoutAndTarget) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(60);
    const TaskInstance ex = gen_adding(n, rng);
    ASSERT_EQ(ex.inputs.rows(), n);
    ASSERT_EQ(ex.inputs.cols(), 2u);
    std::vector<std::size_t> marked;
    for (std::size_t t = 0; t < n; ++t) {
      EXPECT_GE(ex.inputs(t, 0), 0.0);
      EXPECT_LT(ex.inputs(t, 0), 1.0);
      if (ex.inputs(t, 1) == 1.0) marked.push_back(t);
      else EXPECT_EQ(ex.inputs(t, 1), 0.0);
    }
    ASSERT_EQ(marked.size(), 2u);
    EXPECT_LT(marked[0], n / 2);
    EXPECT_GE(marked[1], n / 2);
    EXPECT_EQ(ex.markers, marked);
    EXPECT_EQ(ex.target(0, 0), ex.inputs(marked[0], 0) + ex.inputs(marked[1], 0));
  }
  EXPECT_THROW(gen_adding(1, rng), std::invalid_argument);
}

TEST(Adding, SameStreamSameInstance) {
  Rng a = Rng::for_stream(3, 17), b = Rng::for_stream(3, 17);
  const TaskInstance x = gen_adding(50, a), y = gen_adding(50, b);
  EXPECT_EQ(x.inputs, y.inputs);
  EXPECT_EQ(x.target, y.target);
}

TEST(Adding, ConstantGuessBaseline) {
  Rng rng(4);
  double total = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double err = gen_adding(20, rng).target(0, 0) - 1.0;
    total += err * err;
  }
  EXPECT_NEAR(total / count, 1.0 / 6.0, 0.01);
}

TEST(Copy, LayoutAndLabels) {
  Rng rng(5);
  const std::size_t n = 7, k = 3, a = 4;
  const TaskInstance ex = gen_copy(n, k, a, rng);
  ASSERT_EQ(ex.inputs.rows(), 2 * k + n + 1);
  ASSERT_EQ(ex.inputs.cols(), a + 2);
  for (std::size_t t = 0; t < ex.inputs.rows(); ++t) {
    double sum = 0.0;
    for (double v : ex.inputs.row(t)) sum += v;
    EXPECT_EQ(sum, 1.0);
  }
  for (std::size_t t = k; t < k + n; ++t) EXPECT_EQ(ex.inputs(t, copy_blank(a)), 1.0);
  EXPECT_EQ(ex.inputs(k + n, copy_cue(a)), 1.0);
  ASSERT_EQ(ex.labels.size(), k);
  for (std::size_t j = 0; j < k; ++j) {
    EXPECT_EQ(ex.labels[j].position, k + n + 1 + j);
    EXPECT_EQ(ex.inputs(j, static_cast<std::size_t>(ex.labels[j].target)), 1.0);
    EXPECT_EQ(ex.inputs(k + n + 1 + j, copy_blank(a)), 1.0);
  }
}

TEST(Copy, SingleSymbolPayload) {
  Rng rng(6);
  const TaskInstance ex = gen_copy(5, 1, 2, rng);
  ASSERT_EQ(ex.labels.size(), 1u);
  EXPECT_EQ(ex.inputs(0, static_cast<std::size_t>(ex.labels[0].target)), 1.0);
  Rng again(6);
  EXPECT_EQ(gen_copy(5, 1, 2, again).inputs, ex.inputs);
  EXPECT_THROW(gen_copy(5, 0, 2, rng), std::invalid_argument);
  EXPECT_THROW(gen_copy(5, 1, 1, rng), std::invalid_argument);
}

TEST(ToySentiment, VocabularyAndTokenizer) {
  EXPECT_EQ(toy_vocabulary().size(), kToyVocabSize);
  const auto tokens = tokenize_toy("this movie is great");
  ASSERT_EQ(tokens.size(), 4u);
  EXPECT_EQ(toy_polarity(tokens[3]), 1);
  EXPECT_EQ(toy_polarity(tokens[0]), 0);
  EXPECT_EQ(toy_polarity(tokenize_toy("terrible")[0]), -1);
  EXPECT_EQ(toy_words(tokens), (std::vector<std::string>{"this", "movie", "is", "great"}));
  EXPECT_THROW(tokenize_toy("this movie is groovy"), std::invalid_argument);
}

TEST(ToySentiment, ExactlyOneSalientWordDecidesLabel) {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const TaskInstance ex = gen_toy_sentiment(rng);
    ASSERT_GE(ex.length(), kToyMinLength);
    ASSERT_LE(ex.length(), kToyMaxLength);
    std::size_t salient = 0;
    int polarity = 0;
    for (int token : ex.tokens) {
      if (toy_polarity(token) != 0) {
        ++salient;
        polarity = toy_polarity(token);
      }
    }
    ASSERT_EQ(salient, 1u);
    ASSERT_EQ(ex.labels.size(), 1u);
    EXPECT_EQ(ex.labels[0].position, ex.length() - 1);
    EXPECT_EQ(ex.labels[0].target, polarity > 0 ? 1 : 0);
    ASSERT_EQ(ex.markers.size(), 1u);
    EXPECT_NE(toy_polarity(ex.tokens[ex.markers[0]]), 0);
  }
}

TEST(ToySentiment, LabelsBalanced) {
  Rng rng(8);
  int positive = 0;
  for (int i = 0; i < 10000; ++i) positive += gen_toy_sentiment(rng).labels[0].target;
  EXPECT_NEAR(positive / 10000.0, 0.5, 0.02);
}

TEST(CharLm, WindowsPredictNextByte) {
  const CharCorpus corpus = CharCorpus::load(default_corpus_path());
  EXPECT_GE(corpus.text().size(), kMinCorpusBytes);
  Rng rng(9);
  const TaskInstance ex = corpus.sample_window(32, rng);
  ASSERT_EQ(ex.tokens.size(), 32u);
  ASSERT_EQ(ex.labels.size(), 32u);
  std::string window(ex.tokens.begin(), ex.tokens.end());
  window.push_back(static_cast<char>(ex.labels.back().target));
  EXPECT_NE(corpus.train_split().find(window), std::string_view::npos);
  for (std::size_t t = 0; t + 1 < 32; ++t) EXPECT_EQ(ex.labels[t].target, ex.tokens[t + 1]);
  for (const Label& l : ex.labels) {
    EXPECT_GE(l.target, 0);
    EXPECT_LT(l.target, 256);
  }
}

TEST(CharLm, TilesCoverTheText) {
  const std::string text = "the quick brown fox jumps";
  const auto windows = CharCorpus::tile(text, 6);
  std::string targets;
  std::string inputs;
  for (const TaskInstance& w : windows) {
    for (int tok : w.tokens) inputs.push_back(static_cast<char>(tok));
    for (const Label& l : w.labels) targets.push_back(static_cast<char>(l.target));
  }
  EXPECT_EQ(inputs, text.substr(0, text.size() - 1));
  EXPECT_EQ(targets, text.substr(1));
}

TEST(CharLm, SmallCorpusRejected) {
  EXPECT_THROW(CharCorpus(std::string(kMinCorpusBytes - 1, 'a')), std::invalid_argument);
  EXPECT_NO_THROW(CharCorpus(std::string(kMinCorpusBytes, 'a')));
}

TEST(CharLm, UniformPredictorLoss) {
  const LossGrad lg = softmax_cross_entropy(Matrix(1, 256), 'e');
  EXPECT_NEAR(lg.loss, std::log(256.0), 1e-12);
  EXPECT_NEAR(lg.loss, 5.545, 1e-3);
}

TEST(CharLm, BatchesAreDeterministic) {
  const CharCorpus corpus = CharCorpus::load(default_corpus_path());
  Rng a(10), b(10);
  const auto x = charlm_batch(corpus, 16, 4, a);
  const auto y = charlm_batch(corpus, 16, 4, b);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(x[i].tokens, y[i].tokens);
}

TEST(TaskIds, RoundTrip) {
  for (TaskId t : {TaskId::adding, TaskId::copy, TaskId::toysent, TaskId::charlm}) {
    EXPECT_EQ(parse_task(to_string(t)), t);
  }
  EXPECT_THROW(parse_task("squad"), std::invalid_argument);
}

}  // namespace
}  // namespace lrn

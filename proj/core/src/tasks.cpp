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


#include "lrnkit/tasks.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace lrn {

std::string_view to_string(TaskId task) {
  switch (task) {
    case TaskId::adding: return "adding";
    case TaskId::copy: return "copy";
    case TaskId::toysent: return "toysent";
    case TaskId::charlm: return "charlm";
  }
  return "?";
}

TaskId parse_task(std::string_view name) {
  for (TaskId t : {TaskId::adding, TaskId::copy, TaskId::toysent, TaskId::charlm}) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown task '" + std::string(name) + "' (expected adding, copy, toysent, charlm)");
}

TaskInstance gen_adding(std::size_t n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("gen_adding: length must be at least 2, got " + std::to_string(n));
  TaskInstance inst;
  inst.inputs = Matrix(n, 2);
  for (std::size_t t = 0; t < n; ++t) inst.inputs(t, 0) = rng.uniform();
  const std::size_t half = n / 2;
  const std::size_t first = rng.uniform_index(half);
  const std::size_t second = half + rng.uniform_index(n - half);
  inst.inputs(first, 1) = 1.0;
  inst.inputs(second, 1) = 1.0;
  inst.markers = {first, second};
  inst.target = Matrix(1, 1, inst.inputs(first, 0) + inst.inputs(second, 0));
  return inst;
}

TaskInstance gen_copy(std::size_t n, std::size_t k, std::size_t alphabet, Rng& rng) {
  if (k < 1) throw std::invalid_argument("gen_copy: payload length must be at least 1");
  if (alphabet < 2) throw std::invalid_argument("gen_copy: alphabet must have at least 2 symbols");
  const std::size_t length = 2 * k + n + 1;
  TaskInstance inst;
  inst.inputs = Matrix(length, alphabet + 2);
  std::vector<int> payload(k);
  for (std::size_t j = 0; j < k; ++j) {
    payload[j] = static_cast<int>(rng.uniform_index(alphabet));
    inst.inputs(j, static_cast<std::size_t>(payload[j])) = 1.0;
  }
  for (std::size_t t = k; t < k + n; ++t) inst.inputs(t, copy_blank(alphabet)) = 1.0;
  inst.inputs(k + n, copy_cue(alphabet)) = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t pos = k + n + 1 + j;
    inst.inputs(pos, copy_blank(alphabet)) = 1.0;
    inst.labels.push_back({pos, payload[j]});
  }
  return inst;
}

namespace {

// Ids 0..7 positive, 8..15 negative, the rest filler.
constexpr std::size_t kPositiveWords = 8;
constexpr std::size_t kNegativeWords = 8;
constexpr std::size_t kSalientWords = kPositiveWords + kNegativeWords;

const std::array<const char*, kToyVocabSize> kToyWords = {
    "great", "excellent", "wonderful", "superb", "brilliant", "delightful", "charming", "moving",
    "terrible", "awful", "horrible", "dreadful", "boring", "tedious", "clumsy", "bland",
    "this", "that", "the", "a", "movie", "film", "story", "plot",
    "is", "was", "seems", "felt", "acting", "cast", "script", "ending",
    "and", "but", "with", "of", "in", "on", "at", "for",
    "it", "really", "quite", "very", "somewhat", "overall", "again", "still",
    "i", "we", "they", "watched", "saw", "thought", "found", "said",
    "scene", "music", "director", "night", "hour", "friend", "theater", "screen"};

}  // namespace

const std::vector<std::string>& toy_vocabulary() {
  static const std::vector<std::string> vocab(kToyWords.begin(), kToyWords.end());
  return vocab;
}

int toy_polarity(int token) {
  if (token < 0 || static_cast<std::size_t>(token) >= kToyVocabSize) {
    throw std::out_of_range("toy_polarity: token " + std::to_string(token));
  }
  const auto id = static_cast<std::size_t>(token);
  if (id < kPositiveWords) return 1;
  if (id < kSalientWords) return -1;
  return 0;
}

std::vector<int> tokenize_toy(std::string_view text) {
  const auto& vocab = toy_vocabulary();
  std::vector<int> tokens;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    const auto it = std::find(vocab.begin(), vocab.end(), word);
    if (it == vocab.end()) throw std::invalid_argument("unknown word '" + word + "'");
    tokens.push_back(static_cast<int>(it - vocab.begin()));
  }
  return tokens;
}

std::vector<std::string> toy_words(const std::vector<int>& tokens) {
  std::vector<std::string> words;
  words.reserve(tokens.size());
  for (int t : tokens) words.push_back(toy_vocabulary().at(static_cast<std::size_t>(t)));
  return words;
}

TaskInstance gen_toy_sentiment(Rng& rng) {
  const std::size_t length = kToyMinLength + rng.uniform_index(kToyMaxLength - kToyMinLength + 1);
  const bool positive = rng.coin();
  const std::size_t salient_pos = rng.uniform_index(length);
  const std::size_t salient = (positive ? 0 : kPositiveWords) + rng.uniform_index(kPositiveWords);

  TaskInstance inst;
  inst.tokens.resize(length);
  for (std::size_t t = 0; t < length; ++t) {
    inst.tokens[t] = static_cast<int>(t == salient_pos ? salient
                                                       : kSalientWords + rng.uniform_index(kToyVocabSize - kSalientWords));
  }
  inst.labels.push_back({length - 1, positive ? 1 : 0});
  inst.markers = {salient_pos};
  return inst;
}

std::filesystem::path default_corpus_path() {
  const std::filesystem::path build_tree(LRNKIT_DEFAULT_CORPUS);
  if (std::filesystem::exists(build_tree)) return build_tree;
  return std::filesystem::path(LRNKIT_INSTALLED_CORPUS);
}

CharCorpus::CharCorpus(std::string text, double train_fraction) : text_(std::move(text)) {
  if (text_.size() < kMinCorpusBytes) {
    throw std::invalid_argument("corpus has " + std::to_string(text_.size()) + " bytes, need at least " +
                                std::to_string(kMinCorpusBytes));
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("corpus train fraction must lie in (0, 1)");
  }
  split_ = static_cast<std::size_t>(train_fraction * static_cast<double>(text_.size()));
}

CharCorpus CharCorpus::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return CharCorpus(std::move(text));
}

namespace {

TaskInstance window_at(std::string_view part, std::size_t start, std::size_t n) {
  TaskInstance inst;
  inst.tokens.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    inst.tokens.push_back(static_cast<unsigned char>(part[start + t]));
    inst.labels.push_back({t, static_cast<unsigned char>(part[start + t + 1])});
  }
  return inst;
}

}  // namespace

TaskInstance CharCorpus::sample_window(std::size_t n, Rng& rng) const {
  const std::string_view part = train_split();
  if (n == 0 || part.size() < n + 1) throw std::invalid_argument("sample_window: window longer than training split");
  return window_at(part, rng.uniform_index(part.size() - n), n);
}

std::vector<TaskInstance> CharCorpus::tile(std::string_view part, std::size_t n) {
  if (n == 0) throw std::invalid_argument("tile: window length must be positive");
  std::vector<TaskInstance> windows;
  for (std::size_t start = 0; start + 1 < part.size(); start += n) {
    windows.push_back(window_at(part, start, std::min(n, part.size() - 1 - start)));
  }
  return windows;
}

std::vector<TaskInstance> charlm_batch(const CharCorpus& corpus, std::size_t n, std::size_t batch, Rng& rng) {
  std::vector<TaskInstance> out;
  out.reserve(batch);
  for (std::size_t j = 0; j < batch; ++j) out.push_back(corpus.sample_window(n, rng));
  return out;
}

}  // namespace lrn

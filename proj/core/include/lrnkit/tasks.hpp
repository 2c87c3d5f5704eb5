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


// Synthetic long-range tasks and a byte-level corpus reader. Every generator
// draws only from the Rng it is handed, so an instance is a pure function of
// that stream (see Rng::for_stream).

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lrnkit/matrix.hpp"
#include "lrnkit/rng.hpp"

namespace lrn {

enum class TaskId { adding, copy, toysent, charlm };

std::string_view to_string(TaskId task);
TaskId parse_task(std::string_view name);

struct Label {
  std::size_t position = 0;
  int target = 0;

  bool operator==(const Label&) const = default;
};

struct TaskInstance {
  Matrix inputs;                     // n×d_in feature rows (adding, copy)
  std::vector<int> tokens;           // token ids (toysent, charlm)
  std::vector<Label> labels;         // class targets
  Matrix target;                     // regression target at the final position
  std::vector<std::size_t> markers;  // adding: marked positions; toysent: salient position

  std::size_t length() const { return tokens.empty() ? inputs.rows() : tokens.size(); }
};

/// Channel 0 uniform in [0,1); channel 1 marks one position in each half.
/// Target is the 1×1 sum of the two marked values. n ≥ 2.
TaskInstance gen_adding(std::size_t n, Rng& rng);

/// Copy-task channel layout: 0..A−1 symbols, A blank, A+1 recall cue.
inline std::size_t copy_blank(std::size_t alphabet) { return alphabet; }
inline std::size_t copy_cue(std::size_t alphabet) { return alphabet + 1; }

/// k payload symbols, n blanks, the cue, k blanks (length 2k+n+1), one-hot.
/// Labels ask for payload symbol j at position k+n+1+j.
TaskInstance gen_copy(std::size_t n, std::size_t k, std::size_t alphabet, Rng& rng);

// Toy sentiment: 4 to 12 words over a fixed 64-word vocabulary, exactly one
// of which is salient. The label (1 positive, 0 negative) is the salient
// word's polarity and is drawn by a fair coin.

inline constexpr std::size_t kToyVocabSize = 64;
inline constexpr std::size_t kToyMinLength = 4;
inline constexpr std::size_t kToyMaxLength = 12;

const std::vector<std::string>& toy_vocabulary();
/// +1 positive, −1 negative, 0 filler.
int toy_polarity(int token);
/// Whitespace split; throws std::invalid_argument on a word outside the vocabulary.
std::vector<int> tokenize_toy(std::string_view text);
std::vector<std::string> toy_words(const std::vector<int>& tokens);

TaskInstance gen_toy_sentiment(Rng& rng);

// Byte-level language modelling.

inline constexpr std::size_t kMinCorpusBytes = 10000;

/// Path of the bundled corpus (build tree first, then the install prefix).
std::filesystem::path default_corpus_path();

class CharCorpus {
 public:
  /// Throws std::invalid_argument when text is shorter than kMinCorpusBytes.
  explicit CharCorpus(std::string text, double train_fraction = 0.9);
  static CharCorpus load(const std::filesystem::path& path);

  const std::string& text() const { return text_; }
  std::string_view train_split() const { return std::string_view(text_).substr(0, split_); }
  std::string_view eval_split() const { return std::string_view(text_).substr(split_); }

  /// Random length-n window of the training split: tokens are bytes p..p+n−1,
  /// label t is byte p+t+1.
  TaskInstance sample_window(std::size_t n, Rng& rng) const;

  /// Consecutive windows starting at 0, n, 2n, … whose targets tile `part`
  /// (the final window may be shorter).
  static std::vector<TaskInstance> tile(std::string_view part, std::size_t n);

 private:
  std::string text_;
  std::size_t split_ = 0;
};

/// `batch` training windows drawn in order from rng.
std::vector<TaskInstance> charlm_batch(const CharCorpus& corpus, std::size_t n, std::size_t batch, Rng& rng);

}  // namespace lrn

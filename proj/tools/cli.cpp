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


#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lrnkit/analysis.hpp"
#include "lrnkit/bench.hpp"
#include "lrnkit/checkpoint.hpp"
#include "lrnkit/decomposition.hpp"
#include "lrnkit/gradcheck.hpp"
#include "lrnkit/rng.hpp"
#include "lrnkit/training.hpp"

namespace lrn::cli {
namespace {

const std::vector<std::string> kCellNames = {"lrn", "olrn", "glrn", "elrn", "elman"};
const std::vector<std::string> kActivationNames = {"tanh", "identity"};

// Reports go to --out when given, otherwise to the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::string format_real(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6g", x);
  return buffer;
}

struct GradcheckArgs {
  std::string cell = "lrn";
  std::string activation = "tanh";
  std::size_t dim = 6;
  std::size_t len = 10;
  std::uint64_t seed = 13;
  double tol = 1e-4;
  double delta = 1e-5;
  std::string out;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  const GradcheckReport report =
      gradcheck_cell(parse_cell_kind(a.cell), parse_activation(a.activation), a.dim, a.len, a.seed, a.delta);
  const bool pass = report.max_rel_error() <= a.tol;
  out << "gradcheck cell=" << a.cell << " activation=" << to_string(report.activation) << " d=" << a.dim
      << " n=" << a.len << " seed=" << a.seed << " max_rel_error=" << format_real(report.max_rel_error())
      << " worst=" << report.worst() << " tol=" << format_real(a.tol) << (pass ? " PASS" : " FAIL") << '\n';
  if (!a.out.empty()) {
    Sink sink(a.out, out);
    sink.get() << to_json(report).dump(2) << '\n';
  }
  return pass ? kExitOk : kExitCheckFailed;
}

struct TrainArgs {
  TrainConfig config;
  std::string task = "adding";
  std::string cell = "lrn";
  std::string activation = "tanh";
  std::string optimizer = "adam";
  std::string corpus;
  std::optional<double> target;
  std::string checkpoint;
  std::string out;
};

int cmd_train(TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig& c = a.config;
  c.task = parse_task(a.task);
  c.kind = parse_cell_kind(a.cell);
  c.activation = parse_activation(a.activation);
  c.optimizer = parse_optimizer(a.optimizer);
  c.corpus = a.corpus;
  c.target_metric = a.target;
  c.validate();

  Sink sink(a.out, out);
  TrainResult result;
  try {
    result = train(c, [&](const MetricsRecord& r) { sink.get() << to_json(r).dump() << std::endl; });
  } catch (const TrainingDiverged& e) {
    err << e.what() << '\n';
    return kExitCheckFailed;
  }
  if (!a.checkpoint.empty()) save_checkpoint(a.checkpoint, result.model, c);
  err << "trained " << result.steps << " steps, final " << metric_name(c.task) << " "
      << format_real(result.final_metric) << '\n';
  if (c.target_metric && !result.reached_target) return kExitCheckFailed;
  return kExitOk;
}

struct BenchArgs {
  BenchConfig config;
  std::string cell = "lrn";
  std::string mode = "fused";
  std::string precision = "f32";
  std::string out;
};

int cmd_bench(BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchConfig& c = a.config;
  c.kind = parse_cell_kind(a.cell);
  c.mode = parse_bench_mode(a.mode);
  c.precision = parse_precision(a.precision);
  BenchReport report;
  try {
    report = run_bench(c);
  } catch (const BenchError& e) {
    err << e.what() << '\n';
    return kExitCheckFailed;
  }
  Sink sink(a.out, out);
  sink.get() << to_json(report).dump(2) << '\n';
  return kExitOk;
}

struct TraceArgs {
  std::string checkpoint;
  std::string input;
  int layer = -1;
  std::string out;
};

int cmd_trace(const TraceArgs& a, std::ostream& out) {
  TrainConfig config;
  const Model model = load_checkpoint(a.checkpoint, &config);
  TaskInstance example;
  std::vector<std::string> labels;
  switch (model.task) {
    case TaskId::toysent:
      example.tokens = tokenize_toy(a.input);
      labels = toy_words(example.tokens);
      break;
    case TaskId::charlm:
      for (unsigned char ch : a.input) {
        example.tokens.push_back(ch);
        labels.emplace_back(1, static_cast<char>(ch));
      }
      break;
    default:
      throw std::invalid_argument("trace needs a toysent or charlm checkpoint, got " +
                                  std::string(to_string(model.task)));
  }
  if (example.tokens.empty()) throw std::invalid_argument("trace: --input is empty");
  const std::vector<Trajectory> trajs = run_layers(model, example);
  const std::size_t layer = a.layer < 0 ? trajs.size() - 1 : static_cast<std::size_t>(a.layer);
  if (layer >= trajs.size()) throw std::invalid_argument("trace: --layer out of range");
  Sink sink(a.out, out);
  write_trace_csv(sink.get(), trajs[layer], labels);
  return kExitOk;
}

struct GradnormsArgs {
  std::string cell = "lrn";
  std::string activation = "tanh";
  std::size_t dim = 32;
  std::size_t len = 200;
  std::uint64_t seed = 9;
  std::optional<double> recurrent_scale;
  std::string checkpoint;
  std::string out;
};

int cmd_gradnorms(const GradnormsArgs& a, std::ostream& out) {
  Rng rng(a.seed);
  CellParams params;
  Matrix inputs;
  if (!a.checkpoint.empty()) {
    TrainConfig config;
    const Model model = load_checkpoint(a.checkpoint, &config);
    params = model.layers.front();
    config.length = a.len;
    config.eval_examples = 1;
    TaskInstance example;
    if (config.task == TaskId::charlm) {
      example = CharCorpus::load(config.corpus.empty() ? default_corpus_path() : config.corpus).sample_window(a.len, rng);
    } else if (config.task == TaskId::adding) {
      example = gen_adding(a.len, rng);
    } else if (config.task == TaskId::copy) {
      example = gen_copy(a.len, config.copy_payload, config.alphabet, rng);
    } else {
      example = gen_toy_sentiment(rng);
    }
    if (model.embedding) {
      inputs = Matrix(example.tokens.size(), model.embedding->cols());
      for (std::size_t t = 0; t < example.tokens.size(); ++t) {
        inputs.set_row(t, model.embedding->row(static_cast<std::size_t>(example.tokens[t])));
      }
    } else {
      inputs = example.inputs;
    }
  } else {
    params = CellParams::initialize(parse_cell_kind(a.cell), parse_activation(a.activation), a.dim, a.dim, rng);
    if (a.recurrent_scale) {
      if (params.kind != CellKind::elman) throw std::invalid_argument("--recurrent-scale applies to elman only");
      params.u = scale(random_orthogonal<double>(a.dim, rng), *a.recurrent_scale);
    }
    inputs = random_normal<double>(a.len, a.dim, rng);
  }
  const NormProfile profile = gradient_norm_profile(params, inputs, {}, a.seed);
  Sink sink(a.out, out);
  sink.get() << to_json(profile).dump() << '\n';
  return kExitOk;
}

struct DecomposeArgs {
  std::string cell = "lrn";
  std::size_t dim = 8;
  std::size_t len = 32;
  std::uint64_t seed = 21;
  double tol = 1e-9;
};

int cmd_decompose(const DecomposeArgs& a, std::ostream& out) {
  Rng rng(a.seed);
  const CellParams params = CellParams::initialize(parse_cell_kind(a.cell), Activation::identity, a.dim, a.dim, rng);
  const Trajectory traj = forward_sequence(params, random_normal<double>(a.len, a.dim, rng));
  const double err = max_expansion_error(traj);
  const bool pass = err <= a.tol;
  out << "decompose-check cell=" << a.cell << " d=" << a.dim << " n=" << a.len << " seed=" << a.seed
      << " max_abs_diff=" << format_real(err) << " tol=" << format_real(a.tol) << (pass ? " PASS" : " FAIL") << '\n';
  return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LRN cell toolkit: gradient checks, training, benchmarks and decomposition traces", "lrnkit"};
  app.require_subcommand(1);

  GradcheckArgs gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic BPTT with central finite differences");
  gradcheck->add_option("--cell", gc.cell, "Cell kind")->check(CLI::IsMember(kCellNames));
  gradcheck->add_option("--activation", gc.activation, "Activation g")->check(CLI::IsMember(kActivationNames));
  gradcheck->add_option("--dim", gc.dim, "Hidden size d (also the input width)")->check(CLI::PositiveNumber);
  gradcheck->add_option("--len", gc.len, "Sequence length n")->check(CLI::PositiveNumber);
  gradcheck->add_option("--seed", gc.seed, "Random seed");
  gradcheck->add_option("--tol", gc.tol, "Maximum relative error");
  gradcheck->add_option("--delta", gc.delta, "Finite-difference step");
  gradcheck->add_option("--out", gc.out, "Write the full JSON report here");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a desk-scale task; metrics as JSON Lines");
  train_cmd->add_option("--task", tr.task, "Task id")->check(CLI::IsMember({"adding", "copy", "toysent", "charlm"}));
  train_cmd->add_option("--cell", tr.cell, "Cell kind")->check(CLI::IsMember(kCellNames));
  train_cmd->add_option("--activation", tr.activation, "Activation g")->check(CLI::IsMember(kActivationNames));
  train_cmd->add_option("--dim", tr.config.hidden, "Hidden size d")->check(CLI::PositiveNumber);
  train_cmd->add_option("--layers", tr.config.layers, "Stacked layers")->check(CLI::PositiveNumber);
  train_cmd->add_option("--len", tr.config.length, "adding: n; copy: blank span; charlm: window")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", tr.config.batch, "Examples per update")->check(CLI::PositiveNumber);
  train_cmd->add_option("--steps", tr.config.max_steps, "Maximum updates")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.config.lr, "Learning rate")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--clip-norm", tr.config.clip_norm, "Global gradient norm limit")->check(CLI::PositiveNumber);
  train_cmd->add_option("--optimizer", tr.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
  train_cmd->add_option("--seed", tr.config.seed, "Random seed");
  train_cmd->add_option("--eval-interval", tr.config.eval_interval, "Updates between evaluations")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--eval-examples", tr.config.eval_examples, "Held-out examples (charlm: window cap)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--payload", tr.config.copy_payload, "copy: payload length k")->check(CLI::PositiveNumber);
  train_cmd->add_option("--alphabet", tr.config.alphabet, "copy: alphabet size A")->check(CLI::Range(2, 1 << 16));
  train_cmd->add_option("--embed-dim", tr.config.embed_dim, "Embedding width for token tasks")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--corpus", tr.corpus, "charlm corpus (default: bundled text)");
  train_cmd->add_option("--target", tr.target, "Stop once the eval metric reaches this value");
  train_cmd->add_option("--checkpoint", tr.checkpoint, "Write the final model here");
  train_cmd->add_option("--out", tr.out, "Write metrics JSON Lines here");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time the recurrence in fused or naive mode");
  bench->add_option("--cell", bn.cell, "Cell kind")->check(CLI::IsMember(kCellNames));
  bench->add_option("--mode", bn.mode, "fused or naive")->check(CLI::IsMember({"fused", "naive"}));
  bench->add_option("--dim", bn.config.d, "Hidden size d (also the input width)")->check(CLI::PositiveNumber);
  bench->add_option("--len", bn.config.n, "Sequence length n")->check(CLI::PositiveNumber);
  bench->add_option("--batch", bn.config.batch, "Independent sequences per run")->check(CLI::PositiveNumber);
  bench->add_option("--repeats", bn.config.repeats, "Timed repeats (at least 5)")->check(CLI::Range(5, 1 << 20));
  bench->add_option("--warmups", bn.config.warmups, "Untimed warmups (at least 2)")->check(CLI::Range(2, 1 << 20));
  bench->add_option("--seed", bn.config.seed, "Random seed");
  bench->add_flag("--layer-norm", bn.config.layer_norm, "Normalize every parameterized product");
  bench->add_flag("--backward", bn.config.backward, "Time forward+backward instead of forward only");
  bench->add_option("--precision", bn.precision, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}));
  bench->add_option("--out", bn.out, "Write the JSON report here");

  TraceArgs tc;
  auto* trace = app.add_subcommand("trace", "Decay curves of a trained toysent or charlm model as CSV");
  trace->add_option("--checkpoint", tc.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  trace->add_option("--input", tc.input, "Text to run through the model")->required();
  trace->add_option("--layer", tc.layer, "Layer to trace (default: the top one)");
  trace->add_option("--out", tc.out, "Write the CSV here");

  GradnormsArgs gn;
  auto* gradnorms = app.add_subcommand("gradnorms", "Backward gradient-norm profile from a final-step loss");
  gradnorms->add_option("--cell", gn.cell, "Cell kind")->check(CLI::IsMember(kCellNames));
  gradnorms->add_option("--activation", gn.activation, "Activation g")->check(CLI::IsMember(kActivationNames));
  gradnorms->add_option("--dim", gn.dim, "Hidden size d (also the input width)")->check(CLI::PositiveNumber);
  gradnorms->add_option("--len", gn.len, "Sequence length n")->check(CLI::PositiveNumber);
  gradnorms->add_option("--seed", gn.seed, "Random seed");
  gradnorms->add_option("--recurrent-scale", gn.recurrent_scale, "elman: U = scale * random orthogonal");
  gradnorms->add_option("--checkpoint", gn.checkpoint, "Profile the first layer of a trained model instead")
      ->check(CLI::ExistingFile);
  gradnorms->add_option("--out", gn.out, "Write the JSON profile here");

  DecomposeArgs dc;
  auto* decompose = app.add_subcommand("decompose-check", "Compare the unrolled expansion with the recurrence");
  decompose->add_option("--cell", dc.cell, "lrn, glrn or elrn")->check(CLI::IsMember({"lrn", "glrn", "elrn"}));
  decompose->add_option("--dim", dc.dim, "Hidden size d")->check(CLI::PositiveNumber);
  decompose->add_option("--len", dc.len, "Sequence length n")->check(CLI::PositiveNumber);
  decompose->add_option("--seed", dc.seed, "Random seed");
  decompose->add_option("--tol", dc.tol, "Maximum absolute difference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gradcheck) return cmd_gradcheck(gc, out);
    if (*train_cmd) return cmd_train(tr, out, err);
    if (*bench) return cmd_bench(bn, out, err);
    if (*trace) return cmd_trace(tc, out);
    if (*gradnorms) return cmd_gradnorms(gn, out);
    if (*decompose) return cmd_decompose(dc, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}

}  // namespace lrn::cli

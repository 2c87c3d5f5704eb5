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
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace lrn {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lrnkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lrnkit_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(Cli, GradcheckPassesAndFails) {
  const Outcome ok = invoke({"gradcheck", "--cell", "olrn", "--dim", "4", "--len", "5"});
  EXPECT_EQ(ok.code, cli::kExitOk) << ok.err;
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  const Outcome strict = invoke({"gradcheck", "--dim", "4", "--len", "5", "--tol", "1e-30"});
  EXPECT_EQ(strict.code, cli::kExitCheckFailed);
  EXPECT_NE(strict.out.find("FAIL"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({"gradcheck", "--cell", "lstm"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"gradcheck", "--frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"bench", "--repeats", "3"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"bench", "--layer-norm", "--backward", "--dim", "4", "--len", "4", "--batch", "1"}).code,
            cli::kExitCheckFailed);
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
}

TEST(Cli, DecomposeCheck) {
  const Outcome r = invoke({"decompose-check", "--cell", "glrn"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(invoke({"decompose-check", "--cell", "elman"}).code, cli::kExitUsage);
}

TEST(Cli, GradnormsJson) {
  const Outcome r = invoke({"gradnorms", "--cell", "elman", "--activation", "identity", "--dim", "4", "--len", "6",
                            "--recurrent-scale", "1.5"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("kind"), "elman");
  ASSERT_EQ(j.at("norms").size(), 6u);
  EXPECT_NEAR(j.at("norms")[5].get<double>() / j.at("norms")[0].get<double>(), std::pow(1.5, 5), 1e-9);
  EXPECT_EQ(invoke({"gradnorms", "--cell", "lrn", "--recurrent-scale", "2"}).code, cli::kExitUsage);
}

TEST(Cli, BenchJson) {
  const auto path = scratch("bench.json");
  const Outcome r =
      invoke({"bench", "--cell", "elrn", "--dim", "8", "--len", "6", "--batch", "2", "--out", path.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("cell"), "elrn");
  EXPECT_EQ(j.at("seconds").size(), 5u);
}

TEST(Cli, TrainThenTrace) {
  const auto ckpt = scratch("toy.json");
  const auto metrics = scratch("metrics.jsonl");
  const Outcome r = invoke({"train", "--task", "toysent", "--dim", "4", "--embed-dim", "4", "--batch", "4", "--steps",
                            "4", "--eval-interval", "2", "--eval-examples", "8", "--checkpoint", ckpt.string(),
                            "--out", metrics.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::ifstream in(metrics);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("metric_name"), "accuracy");
    EXPECT_TRUE(j.contains("step") && j.contains("loss") && j.contains("metric"));
    ++lines;
  }
  EXPECT_EQ(lines, 2u);

  const Outcome trace = invoke({"trace", "--checkpoint", ckpt.string(), "--input", "this movie is great"});
  ASSERT_EQ(trace.code, cli::kExitOk) << trace.err;
  EXPECT_EQ(trace.out.substr(0, trace.out.find('\n')), "source_pos,token,eval_pos,weight_mean");
  EXPECT_NE(trace.out.find("3,great,3,"), std::string::npos);
  EXPECT_EQ(invoke({"trace", "--checkpoint", ckpt.string(), "--input", "this movie is groovy"}).code,
            cli::kExitUsage);

  const Outcome unreachable = invoke({"train", "--task", "adding", "--dim", "4", "--len", "6", "--batch", "2",
                                      "--steps", "2", "--eval-interval", "1", "--eval-examples", "4", "--target",
                                      "-1"});
  EXPECT_EQ(unreachable.code, cli::kExitCheckFailed);
}

}  // namespace
}  // namespace lrn

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


#include "lrnkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lrnkit/rng.hpp"

namespace lrn {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / scale;
}

double GradcheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

std::string GradcheckReport::worst() const {
  const auto it = std::max_element(entries.begin(), entries.end(),
                                   [](const auto& a, const auto& b) { return a.max_rel_error < b.max_rel_error; });
  return it == entries.end() ? std::string() : it->name;
}

namespace {

double probe_loss(const CellParams& params, const Matrix& x, const Matrix& h0, const Matrix& dH) {
  const Trajectory traj = forward_sequence(params, x, h0);
  double loss = 0.0;
  const auto h = traj.h.values();
  const auto w = dH.values();
  for (std::size_t i = 0; i < h.size(); ++i) loss += w[i] * h[i];
  return loss;
}

GradcheckEntry compare(const std::string& name, Matrix& target, const Matrix& analytic, double delta,
                       const std::function<double()>& loss) {
  GradcheckEntry entry;
  entry.name = name;
  auto values = target.values();
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const double saved = values[idx];
    values[idx] = saved + delta;
    const double up = loss();
    values[idx] = saved - delta;
    const double down = loss();
    values[idx] = saved;
    const double numeric = (up - down) / (2.0 * delta);
    const double a = analytic.values()[idx];
    entry.max_abs_error = std::max(entry.max_abs_error, std::abs(a - numeric));
    entry.max_rel_error = std::max(entry.max_rel_error, relative_error(a, numeric));
    ++entry.count;
  }
  return entry;
}

}  // namespace

GradcheckReport gradcheck_cell(CellKind kind, Activation activation, std::size_t d, std::size_t n,
                               std::uint64_t seed, double delta) {
  Rng rng(seed);
  CellParams params = CellParams::initialize(kind, activation, d, d, rng);
  for (auto* bias : {&params.b_q, &params.b_k, &params.b_v, &params.b_o, &params.b}) {
    if (*bias) **bias = random_normal<double>(1, d, rng, 0.5);
  }
  Matrix x = random_normal<double>(n, d, rng);
  Matrix h0 = random_normal<double>(1, d, rng, 0.5);
  const Matrix dH = random_normal<double>(n, d, rng);

  const GradientSet grads = backward_sequence(params, forward_sequence(params, x, h0), dH);
  auto loss = [&] { return probe_loss(params, x, h0, dH); };

  GradcheckReport report;
  report.kind = kind;
  report.activation = params.activation;
  report.d = d;
  report.n = n;
  report.seed = seed;
  report.delta = delta;

  std::vector<std::pair<std::string, const Matrix*>> analytic;
  grads.for_each([&](std::string_view name, const Matrix& m) { analytic.emplace_back(std::string(name), &m); });
  std::size_t slot = 0;
  params.for_each([&](std::string_view name, Matrix& m) {
    report.entries.push_back(compare(std::string(name), m, *analytic.at(slot++).second, delta, loss));
  });
  report.entries.push_back(compare("X", x, grads.dx, delta, loss));
  report.entries.push_back(compare("h0", h0, grads.dh0, delta, loss));
  return report;
}

nlohmann::json to_json(const GradcheckReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"name", e.name},
                       {"count", e.count},
                       {"max_abs_error", e.max_abs_error},
                       {"max_rel_error", e.max_rel_error}});
  }
  return nlohmann::json{{"kind", std::string(to_string(report.kind))},
                        {"activation", std::string(to_string(report.activation))},
                        {"d", report.d},
                        {"n", report.n},
                        {"seed", report.seed},
                        {"delta", report.delta},
                        {"max_rel_error", report.max_rel_error()},
                        {"worst", report.worst()},
                        {"entries", entries}};
}

}  // namespace lrn

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


#include "lrnkit/decomposition.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace lrn {

namespace {

void require_gates(const Trajectory& traj, const char* op) {
  if (!is_lrn_family(traj.kind) || traj.i.rows() != traj.length() || traj.f.rows() != traj.length()) {
    throw std::invalid_argument(std::string(op) + ": trajectory has no gate record (" +
                                std::string(to_string(traj.kind)) + ")");
  }
}

void require_position(const Trajectory& traj, std::size_t pos, const char* op) {
  if (pos >= traj.length()) {
    throw std::out_of_range(std::string(op) + ": position " + std::to_string(pos) + " outside a length-" +
                            std::to_string(traj.length()) + " trajectory");
  }
}

void require_expandable(const Trajectory& traj, const char* op) {
  require_gates(traj, op);
  if (traj.kind == CellKind::olrn) {
    throw std::invalid_argument(std::string(op) + ": oLRN states are output-gated and do not expand");
  }
  if (traj.activation != Activation::identity) {
    throw std::invalid_argument(std::string(op) + ": expansion needs g = identity, trajectory uses " +
                                std::string(to_string(traj.activation)));
  }
  for (double x : traj.h0.values()) {
    if (x != 0.0) throw std::invalid_argument(std::string(op) + ": expansion needs h0 = 0");
  }
}

double row_mean(std::span<const double> row) {
  double total = 0.0;
  for (double x : row) total += x;
  return total / static_cast<double>(row.size());
}

}  // namespace

WeightChain weight_chain(const Trajectory& traj, std::size_t t, std::size_t k) {
  require_gates(traj, "weight_chain");
  require_position(traj, t, "weight_chain");
  if (k > t) throw std::out_of_range("weight_chain: source " + std::to_string(k) + " after position " + std::to_string(t));
  const std::size_t d = traj.hidden_size();
  WeightChain out;
  out.t = t;
  out.k = k;
  out.key = traj.i.row_matrix(k);
  out.query = Matrix(1, d, 1.0);
  for (std::size_t l = t; l > k; --l) {
    auto f = traj.f.row(l);
    for (std::size_t c = 0; c < d; ++c) out.query(0, c) *= f[c];
  }
  out.w = hadamard(out.key, out.query);
  return out;
}

std::vector<WeightChain> attention_weights(const Trajectory& traj, std::size_t t) {
  require_expandable(traj, "attention_weights");
  require_position(traj, t, "attention_weights");
  const std::size_t d = traj.hidden_size();
  std::vector<WeightChain> out(t + 1);
  Matrix query(1, d, 1.0);
  for (std::size_t k = t + 1; k-- > 0;) {
    WeightChain& chain = out[k];
    chain.t = t;
    chain.k = k;
    chain.key = traj.i.row_matrix(k);
    chain.query = query;
    chain.w = hadamard(chain.key, chain.query);
    auto f = traj.f.row(k);
    for (std::size_t c = 0; c < d; ++c) query(0, c) *= f[c];
  }
  return out;
}

Matrix expand_hidden(const Trajectory& traj, std::size_t t) {
  const auto chains = attention_weights(traj, t);
  const std::size_t d = traj.hidden_size();
  Matrix h(1, d);
  for (const WeightChain& chain : chains) {
    auto v = traj.projections.v.row(chain.k);
    for (std::size_t c = 0; c < d; ++c) h(0, c) += chain.w(0, c) * v[c];
  }
  return h;
}

double max_expansion_error(const Trajectory& traj) {
  require_expandable(traj, "max_expansion_error");
  double worst = 0.0;
  for (std::size_t t = 0; t < traj.length(); ++t) {
    worst = std::max(worst, max_abs_diff(expand_hidden(traj, t), traj.h.row_matrix(t)));
  }
  return worst;
}

DecayCurve memory_trace(const Trajectory& traj, std::size_t k) {
  require_gates(traj, "memory_trace");
  require_position(traj, k, "memory_trace");
  const std::size_t n = traj.length();
  DecayCurve curve;
  curve.source = k;
  curve.values.reserve(n - k);
  for (std::size_t t = k; t < n; ++t) {
    const Matrix w = weight_chain(traj, t, k).w;
    curve.values.push_back(row_mean(w.row(0)));
  }
  return curve;
}

std::vector<DecayCurve> memory_traces(const Trajectory& traj) {
  std::vector<DecayCurve> curves;
  curves.reserve(traj.length());
  for (std::size_t k = 0; k < traj.length(); ++k) curves.push_back(memory_trace(traj, k));
  return curves;
}

void write_trace_csv(std::ostream& out, const Trajectory& traj, const std::vector<std::string>& tokens) {
  if (tokens.size() != traj.length()) {
    throw std::invalid_argument("write_trace_csv: " + std::to_string(tokens.size()) + " tokens for a length-" +
                                std::to_string(traj.length()) + " trajectory");
  }
  auto quoted = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + '"';
  };
  out << "source_pos,token,eval_pos,weight_mean\n";
  char buffer[32];
  for (const DecayCurve& curve : memory_traces(traj)) {
    for (std::size_t j = 0; j < curve.values.size(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.9g", curve.values[j]);
      out << curve.source << ',' << quoted(tokens[curve.source]) << ',' << curve.source + j << ',' << buffer << '\n';
    }
  }
}

}  // namespace lrn

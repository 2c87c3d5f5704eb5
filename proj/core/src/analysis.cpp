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


#include "lrnkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrn {

Matrix lrn_jacobian_diag(const StepCache& cache, Activation g) {
  if (cache.kind != CellKind::lrn) {
    throw std::invalid_argument("lrn_jacobian_diag: cache comes from a " + std::string(to_string(cache.kind)) +
                                " step");
  }
  const std::size_t d = cache.h.cols();
  Matrix out(1, d);
  for (std::size_t c = 0; c < d; ++c) {
    const double i = cache.i(0, c);
    const double f = cache.f(0, c);
    const double h = cache.h(0, c);
    const double slope = g == Activation::tanh ? 1.0 - h * h : 1.0;
    out(0, c) = (i * (1.0 - i) * cache.v(0, c) - cache.h_prev(0, c) * f * (1.0 - f) + f) * slope;
  }
  return out;
}

Matrix elman_jacobian(const CellParams& params, const StepCache& cache, Activation g) {
  if (params.kind != CellKind::elman || cache.kind != CellKind::elman) {
    throw std::invalid_argument("elman_jacobian: needs Elman params and an Elman step cache");
  }
  params.validate();
  const std::size_t d = params.hidden_size;
  if (cache.h.cols() != d) throw ShapeError("elman_jacobian: cache width does not match params");
  const Matrix& u = *params.u;
  Matrix out(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    const double h = cache.h(0, j);
    const double slope = g == Activation::tanh ? 1.0 - h * h : 1.0;
    for (std::size_t m = 0; m < d; ++m) out(j, m) = slope * u(m, j);
  }
  return out;
}

double NormProfile::ratio() const {
  if (norms.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
  if (*lo == 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

NormProfile gradient_norm_profile(const CellParams& params, const Matrix& inputs, const Matrix& dh_final,
                                  std::uint64_t seed) {
  const std::size_t d = params.hidden_size;
  const std::size_t n = inputs.rows();
  NormProfile profile;
  profile.kind = params.kind;
  profile.d = d;
  profile.n = n;
  profile.seed = seed;
  if (n == 0) return profile;

  const Trajectory traj = forward_sequence(params, inputs);
  Matrix dH(n, d);
  if (dh_final.empty()) {
    for (std::size_t c = 0; c < d; ++c) dH(n - 1, c) = 1.0;
  } else {
    if (dh_final.rows() != 1 || dh_final.cols() != d) {
      throw ShapeError("gradient_norm_profile: dh_final is " + shape_string(dh_final) + ", expected " +
                       shape_string(1, d));
    }
    dH.set_row(n - 1, dh_final.row(0));
  }
  const ProjectionGrads grads = backward_recurrence(params, traj, dH);
  profile.norms.reserve(n);
  for (std::size_t t = n; t-- > 0;) {
    double sq = 0.0;
    for (double x : grads.dh.row(t)) sq += x * x;
    profile.norms.push_back(std::sqrt(sq));
  }
  return profile;
}

nlohmann::json to_json(const NormProfile& profile) {
  return nlohmann::json{{"kind", std::string(to_string(profile.kind))},
                        {"d", profile.d},
                        {"n", profile.n},
                        {"seed", profile.seed},
                        {"norms", profile.norms}};
}

}  // namespace lrn

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

#include "lrnkit/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "lrnkit/rng.hpp"

namespace lrn {

std::string shape_string(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

namespace {

template <typename T>
void require_same_shape(const char* op, const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
  }
}

// Cache blocking for the k and j loops. Blocking never reorders the k
// summation of an individual output element.
constexpr std::size_t kBlockK = 128;
constexpr std::size_t kBlockJ = 256;

template <typename T>
void gemm_kernel(const T* a, std::size_t lda, const T* b, std::size_t ldb, T* c, std::size_t ldc, std::size_t m,
                 std::size_t n, std::size_t k) {
  for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
    const std::size_t k1 = std::min(k, k0 + kBlockK);
    for (std::size_t j0 = 0; j0 < n; j0 += kBlockJ) {
      const std::size_t j1 = std::min(n, j0 + kBlockJ);
      const std::size_t width = j1 - j0;
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4) {
        T* __restrict c0 = c + (i + 0) * ldc + j0;
        T* __restrict c1 = c + (i + 1) * ldc + j0;
        T* __restrict c2 = c + (i + 2) * ldc + j0;
        T* __restrict c3 = c + (i + 3) * ldc + j0;
        for (std::size_t kk = k0; kk < k1; ++kk) {
          const T* __restrict brow = b + kk * ldb + j0;
          const T a0 = a[(i + 0) * lda + kk];
          const T a1 = a[(i + 1) * lda + kk];
          const T a2 = a[(i + 2) * lda + kk];
          const T a3 = a[(i + 3) * lda + kk];
          for (std::size_t j = 0; j < width; ++j) {
            const T bv = brow[j];
            c0[j] += a0 * bv;
            c1[j] += a1 * bv;
            c2[j] += a2 * bv;
            c3[j] += a3 * bv;
          }
        }
      }
      for (; i < m; ++i) {
        T* __restrict ci = c + i * ldc + j0;
        for (std::size_t kk = k0; kk < k1; ++kk) {
          const T* __restrict brow = b + kk * ldb + j0;
          const T av = a[i * lda + kk];
          for (std::size_t j = 0; j < width; ++j) ci[j] += av * brow[j];
        }
      }
    }
  }
}

template <typename T>
BasicMatrix<T> map(const BasicMatrix<T>& x, auto&& fn) {
  BasicMatrix<T> out(x.rows(), x.cols());
  auto src = x.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = fn(src[i]);
  return out;
}

template <typename T>
BasicMatrix<T> zip(const char* op, const BasicMatrix<T>& a, const BasicMatrix<T>& b, auto&& fn) {
  require_same_shape(op, a, b);
  BasicMatrix<T> out(a.rows(), a.cols());
  auto x = a.values();
  auto y = b.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = fn(x[i], y[i]);
  return out;
}

}  // namespace

template <typename T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, T fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

template <typename T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix: " + std::to_string(data_.size()) + " values cannot fill shape " +
                     shape_string(rows, cols));
  }
}

template <typename T>
BasicMatrix<T> BasicMatrix<T>::from_rows(std::initializer_list<std::initializer_list<T>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<T> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return BasicMatrix(r, c, std::move(data));
}

template <typename T>
BasicMatrix<T> BasicMatrix<T>::row_matrix(std::size_t r) const {
  if (r >= rows_) throw std::out_of_range("row " + std::to_string(r) + " of " + shape_string(rows_, cols_));
  auto src = row(r);
  return BasicMatrix(1, cols_, std::vector<T>(src.begin(), src.end()));
}

template <typename T>
void BasicMatrix<T>::set_row(std::size_t r, std::span<const T> values) {
  if (r >= rows_) throw std::out_of_range("row " + std::to_string(r) + " of " + shape_string(rows_, cols_));
  if (values.size() != cols_) {
    throw ShapeError("set_row: " + std::to_string(values.size()) + " values for width " + std::to_string(cols_));
  }
  std::copy(values.begin(), values.end(), row(r).begin());
}

template <typename T>
BasicMatrix<T> glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw ShapeError("glorot_uniform: empty shape " + shape_string(rows, cols));
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  BasicMatrix<T> out(rows, cols);
  for (auto& v : out.values()) v = static_cast<T>(rng.uniform(-bound, bound));
  return out;
}

template <typename T>
BasicMatrix<T> random_normal(std::size_t rows, std::size_t cols, Rng& rng, T stddev) {
  BasicMatrix<T> out(rows, cols);
  for (auto& v : out.values()) v = static_cast<T>(rng.normal() * static_cast<double>(stddev));
  return out;
}

template <typename T>
BasicMatrix<T> random_orthogonal(std::size_t n, Rng& rng) {
  Matrix q = random_normal<double>(n, n, rng);
  for (std::size_t r = 0; r < n; ++r) {
    auto v = q.row(r);
    for (std::size_t p = 0; p < r; ++p) {
      auto basis = q.row(p);
      double dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) dot += v[c] * basis[c];
      for (std::size_t c = 0; c < n; ++c) v[c] -= dot * basis[c];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return q.cast<T>();
}

template <typename T>
void matmul_accumulate(const BasicMatrix<T>& a, const BasicMatrix<T>& b, BasicMatrix<T>& out) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ for " + shape_string(a) + " x " + shape_string(b));
  }
  if (out.rows() != a.rows() || out.cols() != b.cols()) {
    throw ShapeError("matmul: output " + shape_string(out) + " does not match " + shape_string(a) + " x " +
                     shape_string(b));
  }
  if (a.empty() || b.empty()) return;
  gemm_kernel(a.values().data(), a.cols(), b.values().data(), b.cols(), out.values().data(), out.cols(), a.rows(),
              b.cols(), a.cols());
}

template <typename T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ for " + shape_string(a) + " x " + shape_string(b));
  }
  BasicMatrix<T> out(a.rows(), b.cols());
  matmul_accumulate(a, b, out);
  return out;
}

template <typename T>
BasicMatrix<T> matmul_tn(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: row counts differ for " + shape_string(a) + "^T x " + shape_string(b));
  }
  // out[i][j] = sum_r a[r][i] * b[r][j]; r ascending.
  BasicMatrix<T> out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto arow = a.row(r);
    const T* __restrict brow = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T av = arow[i];
      T* __restrict orow = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

template <typename T>
BasicMatrix<T> matmul_nt(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: column counts differ for " + shape_string(a) + " x " + shape_string(b) + "^T");
  }
  BasicMatrix<T> out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) vecmat_t(a.row(i), b, out.row(i));
  return out;
}

template <typename T>
void vecmat(std::span<const T> x, const BasicMatrix<T>& w, std::span<T> out) {
  if (x.size() != w.rows() || out.size() != w.cols()) {
    throw ShapeError("vecmat: " + shape_string(1, x.size()) + " x " + shape_string(w) + " -> " +
                     shape_string(1, out.size()));
  }
  std::fill(out.begin(), out.end(), T{0});
  gemm_kernel(x.data(), x.size(), w.values().data(), w.cols(), out.data(), out.size(), 1, w.cols(), w.rows());
}

template <typename T>
void vecmat_t(std::span<const T> x, const BasicMatrix<T>& w, std::span<T> out) {
  if (x.size() != w.cols() || out.size() != w.rows()) {
    throw ShapeError("vecmat_t: " + shape_string(1, x.size()) + " x " + shape_string(w) + "^T -> " +
                     shape_string(1, out.size()));
  }
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const T* __restrict wrow = w.row(r).data();
    T acc{0};
    for (std::size_t c = 0; c < x.size(); ++c) acc += x[c] * wrow[c];
    out[r] = acc;
  }
}

template <typename T>
BasicMatrix<T> add(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  return zip("add", a, b, [](T x, T y) { return x + y; });
}

template <typename T>
BasicMatrix<T> sub(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  return zip("sub", a, b, [](T x, T y) { return x - y; });
}

template <typename T>
BasicMatrix<T> hadamard(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  return zip("hadamard", a, b, [](T x, T y) { return x * y; });
}

template <typename T>
BasicMatrix<T> scale(const BasicMatrix<T>& a, T factor) {
  return map(a, [factor](T x) { return x * factor; });
}

template <typename T>
BasicMatrix<T> transpose(const BasicMatrix<T>& a) {
  BasicMatrix<T> out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

template <typename T>
BasicMatrix<T> add_row(const BasicMatrix<T>& m, const BasicMatrix<T>& row) {
  if (row.rows() != 1 || row.cols() != m.cols()) {
    throw ShapeError("add_row: cannot broadcast " + shape_string(row) + " over " + shape_string(m));
  }
  BasicMatrix<T> out = m;
  auto b = row.row(0);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto dst = out.row(r);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += b[c];
  }
  return out;
}

template <typename T>
BasicMatrix<T> sum_rows(const BasicMatrix<T>& m) {
  BasicMatrix<T> out(1, m.cols());
  auto dst = out.row(0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }
  return out;
}

template <typename T>
void add_in_place(BasicMatrix<T>& target, const BasicMatrix<T>& delta) {
  require_same_shape("add_in_place", target, delta);
  auto dst = target.values();
  auto src = delta.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
void scale_in_place(BasicMatrix<T>& target, T factor) {
  for (auto& v : target.values()) v *= factor;
}

template <typename T>
T sigmoid(T x) noexcept {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
BasicMatrix<T> sigmoid(const BasicMatrix<T>& x) {
  return map(x, [](T v) { return sigmoid(v); });
}

template <typename T>
BasicMatrix<T> tanh(const BasicMatrix<T>& x) {
  return map(x, [](T v) { return std::tanh(v); });
}

template <typename T>
BasicMatrix<T> sigmoid_prime_from_value(const BasicMatrix<T>& s) {
  return map(s, [](T v) { return v * (T{1} - v); });
}

template <typename T>
BasicMatrix<T> tanh_prime_from_value(const BasicMatrix<T>& t) {
  return map(t, [](T v) { return T{1} - v * v; });
}

template <typename T>
void layer_norm_span(std::span<const T> x, std::span<const T> gain, std::span<const T> bias, T epsilon,
                     std::span<T> out) {
  const std::size_t d = x.size();
  if (gain.size() != d || bias.size() != d || out.size() != d) {
    throw ShapeError("layer_norm: widths " + std::to_string(d) + ", gain " + std::to_string(gain.size()) +
                     ", bias " + std::to_string(bias.size()));
  }
  if (!(epsilon >= T{0})) throw std::invalid_argument("layer_norm: epsilon must be non-negative");
  if (d == 0) return;
  T mean{0};
  for (T v : x) mean += v;
  mean /= static_cast<T>(d);
  T var{0};
  for (T v : x) var += (v - mean) * (v - mean);
  var /= static_cast<T>(d);
  const T denom = std::sqrt(var + epsilon);
  const T inv = denom > T{0} ? T{1} / denom : T{0};
  for (std::size_t c = 0; c < d; ++c) out[c] = (x[c] - mean) * inv * gain[c] + bias[c];
}

template <typename T>
BasicMatrix<T> layer_norm(const BasicMatrix<T>& x, const BasicMatrix<T>& gain, const BasicMatrix<T>& bias,
                          T epsilon) {
  if (x.rows() != 1) throw ShapeError("layer_norm: expected a row, got " + shape_string(x));
  return layer_norm_rows(x, gain, bias, epsilon);
}

template <typename T>
BasicMatrix<T> layer_norm_rows(const BasicMatrix<T>& x, const BasicMatrix<T>& gain, const BasicMatrix<T>& bias,
                               T epsilon) {
  if (gain.rows() != 1 || bias.rows() != 1) {
    throw ShapeError("layer_norm: gain " + shape_string(gain) + " and bias " + shape_string(bias) +
                     " must be rows");
  }
  BasicMatrix<T> out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) layer_norm_span(x.row(r), gain.row(0), bias.row(0), epsilon, out.row(r));
  return out;
}

template <typename T>
double max_abs_diff(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  require_same_shape("max_abs_diff", a, b);
  double worst = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(x[i]) - static_cast<double>(y[i])));
  }
  return worst;
}

template <typename T>
double squared_norm(const BasicMatrix<T>& a) {
  double acc = 0.0;
  for (T v : a.values()) acc += static_cast<double>(v) * static_cast<double>(v);
  return acc;
}

template <typename T>
double frobenius_norm(const BasicMatrix<T>& a) {
  return std::sqrt(squared_norm(a));
}

template <typename T>
bool all_finite(const BasicMatrix<T>& a) {
  return std::all_of(a.values().begin(), a.values().end(), [](T v) { return std::isfinite(v); });
}

#define LRNKIT_INSTANTIATE_MATRIX(T)                                                                             \
  template class BasicMatrix<T>;                                                                                 \
  template BasicMatrix<T> glorot_uniform<T>(std::size_t, std::size_t, Rng&);                                     \
  template BasicMatrix<T> random_normal<T>(std::size_t, std::size_t, Rng&, T);                                   \
  template BasicMatrix<T> random_orthogonal<T>(std::size_t, Rng&);                                               \
  template BasicMatrix<T> matmul(const BasicMatrix<T>&, const BasicMatrix<T>&);                                  \
  template void matmul_accumulate(const BasicMatrix<T>&, const BasicMatrix<T>&, BasicMatrix<T>&);                \
  template BasicMatrix<T> matmul_tn(const BasicMatrix<T>&, const BasicMatrix<T>&);                               \
  template BasicMatrix<T> matmul_nt(const BasicMatrix<T>&, const BasicMatrix<T>&);                               \
  template void vecmat(std::span<const T>, const BasicMatrix<T>&, std::span<T>);                                 \
  template void vecmat_t(std::span<const T>, const BasicMatrix<T>&, std::span<T>);                               \
  template BasicMatrix<T> add(const BasicMatrix<T>&, const BasicMatrix<T>&);                                     \
  template BasicMatrix<T> sub(const BasicMatrix<T>&, const BasicMatrix<T>&);                                     \
  template BasicMatrix<T> hadamard(const BasicMatrix<T>&, const BasicMatrix<T>&);                                \
  template BasicMatrix<T> scale(const BasicMatrix<T>&, T);                                                       \
  template BasicMatrix<T> transpose(const BasicMatrix<T>&);                                                      \
  template BasicMatrix<T> add_row(const BasicMatrix<T>&, const BasicMatrix<T>&);                                 \
  template BasicMatrix<T> sum_rows(const BasicMatrix<T>&);                                                       \
  template void add_in_place(BasicMatrix<T>&, const BasicMatrix<T>&);                                            \
  template void scale_in_place(BasicMatrix<T>&, T);                                                              \
  template T sigmoid(T) noexcept;                                                                                \
  template BasicMatrix<T> sigmoid(const BasicMatrix<T>&);                                                        \
  template BasicMatrix<T> tanh(const BasicMatrix<T>&);                                                           \
  template BasicMatrix<T> sigmoid_prime_from_value(const BasicMatrix<T>&);                                       \
  template BasicMatrix<T> tanh_prime_from_value(const BasicMatrix<T>&);                                          \
  template void layer_norm_span(std::span<const T>, std::span<const T>, std::span<const T>, T, std::span<T>);    \
  template BasicMatrix<T> layer_norm(const BasicMatrix<T>&, const BasicMatrix<T>&, const BasicMatrix<T>&, T);    \
  template BasicMatrix<T> layer_norm_rows(const BasicMatrix<T>&, const BasicMatrix<T>&, const BasicMatrix<T>&,   \
                                          T);                                                                    \
  template double max_abs_diff(const BasicMatrix<T>&, const BasicMatrix<T>&);                                    \
  template double squared_norm(const BasicMatrix<T>&);                                                           \
  template double frobenius_norm(const BasicMatrix<T>&);                                                         \
  template bool all_finite(const BasicMatrix<T>&);

LRNKIT_INSTANTIATE_MATRIX(float)
LRNKIT_INSTANTIATE_MATRIX(double)

#undef LRNKIT_INSTANTIATE_MATRIX

}  // namespace lrn

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

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrn {

class Rng;

/// Thrown when operand shapes are incompatible. The message names both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix. Vectors are 1×d matrices.
///
/// `double` is the precision for all correctness work; `float` exists for the
/// throughput benchmarks.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{0});
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data);

  static BasicMatrix from_rows(std::initializer_list<std::initializer_list<T>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  /// Copy of row `r` as a 1×cols matrix.
  BasicMatrix row_matrix(std::size_t r) const;
  void set_row(std::size_t r, std::span<const T> values);

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  template <typename U>
  BasicMatrix<U> cast() const {
    BasicMatrix<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.values()[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const BasicMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using MatrixF = BasicMatrix<float>;

std::string shape_string(std::size_t rows, std::size_t cols);

template <typename T>
std::string shape_string(const BasicMatrix<T>& m) {
  return shape_string(m.rows(), m.cols());
}

// Construction.

template <typename T>
BasicMatrix<T> zeros(std::size_t rows, std::size_t cols) {
  return BasicMatrix<T>(rows, cols);
}
inline Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

template <typename T = double>
BasicMatrix<T> identity(std::size_t n) {
  BasicMatrix<T> out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = T{1};
  return out;
}

/// Entries uniform in ±sqrt(6 / (rows + cols)).
template <typename T = double>
BasicMatrix<T> glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

/// Entries standard normal.
template <typename T = double>
BasicMatrix<T> random_normal(std::size_t rows, std::size_t cols, Rng& rng, T stddev = T{1});

/// Random orthogonal matrix (modified Gram-Schmidt on a Gaussian draw).
template <typename T = double>
BasicMatrix<T> random_orthogonal(std::size_t n, Rng& rng);

// Products. Every output element accumulates over k in ascending order
// starting from zero, so a row of a product is bit-identical to the product
// of that row alone.

template <typename T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b);

/// out += a·b, with `out` already shaped a.rows × b.cols.
template <typename T>
void matmul_accumulate(const BasicMatrix<T>& a, const BasicMatrix<T>& b, BasicMatrix<T>& out);

/// aᵀ·b without materializing the transpose.
template <typename T>
BasicMatrix<T> matmul_tn(const BasicMatrix<T>& a, const BasicMatrix<T>& b);

/// a·bᵀ without materializing the transpose.
template <typename T>
BasicMatrix<T> matmul_nt(const BasicMatrix<T>& a, const BasicMatrix<T>& b);

/// Row-vector times matrix: out = x·w, `x.size() == w.rows()`.
template <typename T>
void vecmat(std::span<const T> x, const BasicMatrix<T>& w, std::span<T> out);

/// Row-vector times transposed matrix: out = x·wᵀ, `x.size() == w.cols()`.
template <typename T>
void vecmat_t(std::span<const T> x, const BasicMatrix<T>& w, std::span<T> out);

// Elementwise and structural.

template <typename T>
BasicMatrix<T> add(const BasicMatrix<T>& a, const BasicMatrix<T>& b);
template <typename T>
BasicMatrix<T> sub(const BasicMatrix<T>& a, const BasicMatrix<T>& b);
template <typename T>
BasicMatrix<T> hadamard(const BasicMatrix<T>& a, const BasicMatrix<T>& b);
template <typename T>
BasicMatrix<T> scale(const BasicMatrix<T>& a, T factor);
template <typename T>
BasicMatrix<T> transpose(const BasicMatrix<T>& a);

/// Adds a 1×cols row to every row of `m`. The only broadcast form supported.
template <typename T>
BasicMatrix<T> add_row(const BasicMatrix<T>& m, const BasicMatrix<T>& row);

/// Column sums as a 1×cols matrix.
template <typename T>
BasicMatrix<T> sum_rows(const BasicMatrix<T>& m);

template <typename T>
void add_in_place(BasicMatrix<T>& target, const BasicMatrix<T>& delta);
template <typename T>
void scale_in_place(BasicMatrix<T>& target, T factor);

// Activations. The `_prime_from_value` helpers take the activation's output.

template <typename T>
T sigmoid(T x) noexcept;

template <typename T>
BasicMatrix<T> sigmoid(const BasicMatrix<T>& x);
template <typename T>
BasicMatrix<T> tanh(const BasicMatrix<T>& x);
template <typename T>
BasicMatrix<T> sigmoid_prime_from_value(const BasicMatrix<T>& s);
template <typename T>
BasicMatrix<T> tanh_prime_from_value(const BasicMatrix<T>& t);

// Layer normalization across a row.

inline constexpr double kLayerNormEpsilon = 1e-6;

template <typename T>
void layer_norm_span(std::span<const T> x, std::span<const T> gain, std::span<const T> bias, T epsilon,
                     std::span<T> out);

/// (x − mean)/sqrt(var + epsilon) ⊙ gain + bias for a 1×d row. Uses the
/// population variance.
template <typename T>
BasicMatrix<T> layer_norm(const BasicMatrix<T>& x, const BasicMatrix<T>& gain, const BasicMatrix<T>& bias,
                          T epsilon = static_cast<T>(kLayerNormEpsilon));

/// Row-wise layer_norm over an n×d matrix with shared gain and bias.
template <typename T>
BasicMatrix<T> layer_norm_rows(const BasicMatrix<T>& x, const BasicMatrix<T>& gain, const BasicMatrix<T>& bias,
                               T epsilon = static_cast<T>(kLayerNormEpsilon));

// Reductions and comparisons.

template <typename T>
double max_abs_diff(const BasicMatrix<T>& a, const BasicMatrix<T>& b);
template <typename T>
double squared_norm(const BasicMatrix<T>& a);
template <typename T>
double frobenius_norm(const BasicMatrix<T>& a);
template <typename T>
bool all_finite(const BasicMatrix<T>& a);

}  // namespace lrn

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

#include "lrnkit/matrix.hpp"
#include "lrnkit/rng.hpp"
#include "oracles.hpp"

namespace lrn {
namespace {

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  const Matrix b = Matrix::from_rows({{1.5, -2.0, 3.25}, {0.5, 7.0, -1.0}});
  EXPECT_EQ(matmul(identity(2), b), b);
  EXPECT_EQ(matmul(b, identity(3)), b);
}

TEST(Matmul, ZeroMatrixAnnihilates) {
  const Matrix b = Matrix::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(zeros(3, 2), b), zeros(3, 2));
}

TEST(Matmul, SmallProduct) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  const Matrix expected = Matrix::from_rows({{19, 22}, {43, 50}});
  EXPECT_EQ(oracle::naive_matmul(a, b), expected);
  EXPECT_EQ(matmul(a, b), expected);
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matmul, MatchesNaiveOracleOnRandomBlocks) {
  Rng rng(3);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {5, 7, 3}, {17, 300, 9}, {4, 129, 260}}) {
    const Matrix a = random_normal<double>(m, k, rng);
    const Matrix b = random_normal<double>(k, n, rng);
    EXPECT_LE(max_abs_diff(matmul(a, b), oracle::naive_matmul(a, b)), 1e-12);
  }
}

TEST(Matmul, ProductRowsEqualVectorProductsBitForBit) {
  Rng rng(8);
  const Matrix a = random_normal<double>(9, 300, rng);
  const Matrix b = random_normal<double>(300, 270, rng);
  const Matrix c = matmul(a, b);
  std::vector<double> row(270);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    vecmat(a.row(r), b, std::span<double>(row));
    for (std::size_t j = 0; j < row.size(); ++j) ASSERT_EQ(row[j], c(r, j));
  }
}

TEST(Matmul, TransposedVariantsMatchExplicitTranspose) {
  Rng rng(4);
  const Matrix a = random_normal<double>(6, 4, rng);
  const Matrix b = random_normal<double>(6, 5, rng);
  const Matrix w = random_normal<double>(3, 4, rng);
  EXPECT_LE(max_abs_diff(matmul_tn(a, b), oracle::naive_matmul(transpose(a), b)), 1e-12);
  EXPECT_LE(max_abs_diff(matmul_nt(a, w), oracle::naive_matmul(a, transpose(w))), 1e-12);
}

TEST(Matmul, RepeatedCallsAreBitIdentical) {
  Rng rng(5);
  const MatrixF a = random_normal<float>(33, 70, rng);
  const MatrixF b = random_normal<float>(70, 41, rng);
  EXPECT_EQ(matmul(a, b), matmul(a, b));
}

TEST(Activations, FixedPoints) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(tanh(Matrix(1, 1))(0, 0), 0.0);
  EXPECT_EQ(sigmoid_prime_from_value(Matrix(1, 1, 0.5))(0, 0), 0.25);
  EXPECT_EQ(tanh_prime_from_value(Matrix(1, 1, 0.0))(0, 0), 1.0);
}

TEST(Activations, StrictRanges) {
  const Matrix x = Matrix::from_rows({{-30.0, -5.0, -1e-3, 0.0, 1e-3, 5.0, 30.0}});
  const Matrix s_x = sigmoid(x);
  for (double s : s_x.values()) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  const Matrix moderate = Matrix::from_rows({{-5.0, -0.5, 0.5, 5.0}});
  const Matrix t_x = tanh(moderate);
  for (double t : t_x.values()) {
    EXPECT_GT(t, -1.0);
    EXPECT_LT(t, 1.0);
  }
}

TEST(Activations, SigmoidMatchesLogistic) {
  for (double x : {-700.0, -20.0, -1.0, 0.3, 4.0, 40.0}) {
    EXPECT_NEAR(sigmoid(x), oracle::logistic(x), 1e-15) << x;
  }
}

TEST(Activations, DerivativesFromValues) {
  const Matrix s = Matrix::from_rows({{0.1, 0.5, 0.9}});
  const Matrix ds = sigmoid_prime_from_value(s);
  EXPECT_DOUBLE_EQ(ds(0, 0), 0.09);
  EXPECT_DOUBLE_EQ(ds(0, 2), 0.09);
  const Matrix t = Matrix::from_rows({{-0.5, 0.5}});
  EXPECT_DOUBLE_EQ(tanh_prime_from_value(t)(0, 1), 0.75);
}

TEST(Elementwise, HadamardAndSub) {
  const Matrix a = Matrix::from_rows({{1, 2}});
  const Matrix b = Matrix::from_rows({{3, 4}});
  EXPECT_EQ(hadamard(a, b), Matrix::from_rows({{3, 8}}));
  EXPECT_EQ(hadamard(a, Matrix(1, 2, 1.0)), a);
  EXPECT_EQ(sub(a, a), zeros(1, 2));
  EXPECT_EQ(add(a, b), Matrix::from_rows({{4, 6}}));
  EXPECT_EQ(scale(a, 2.0), Matrix::from_rows({{2, 4}}));
  EXPECT_THROW(add(a, Matrix(2, 1)), ShapeError);
}

TEST(Elementwise, TransposeRowsAndBroadcast) {
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(transpose(m), Matrix::from_rows({{1, 4}, {2, 5}, {3, 6}}));
  EXPECT_EQ(m.row_matrix(1), Matrix::from_rows({{4, 5, 6}}));
  EXPECT_EQ(add_row(m, Matrix::from_rows({{1, 1, 1}})), Matrix::from_rows({{2, 3, 4}, {5, 6, 7}}));
  EXPECT_EQ(sum_rows(m), Matrix::from_rows({{5, 7, 9}}));
  EXPECT_THROW(add_row(m, Matrix(1, 2)), ShapeError);
}

TEST(LayerNorm, ConstantRowBecomesZero) {
  const Matrix out = layer_norm(Matrix(1, 4, 3.0), Matrix(1, 4, 1.0), Matrix(1, 4, 0.0));
  EXPECT_EQ(out, zeros(1, 4));
}

TEST(LayerNorm, NormalizedRowIsUnchanged) {
  const Matrix out = layer_norm(Matrix::from_rows({{-1, 1}}), Matrix(1, 2, 1.0), Matrix(1, 2, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(out(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 1.0);
}

TEST(LayerNorm, ThreeValues) {
  // mean 2, population variance 8/3
  const double expected = 1.2247448713915890;
  const Matrix out = layer_norm(Matrix::from_rows({{0, 2, 4}}), Matrix(1, 3, 1.0), Matrix(1, 3, 0.0), 0.0);
  EXPECT_NEAR(out(0, 0), -expected, 1e-12);
  EXPECT_NEAR(out(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(out(0, 2), expected, 1e-12);
}

TEST(LayerNorm, GainAndBiasApplied) {
  const Matrix out = layer_norm(Matrix::from_rows({{-1, 1}}), Matrix::from_rows({{2, 3}}),
                                Matrix::from_rows({{0.5, -0.5}}), 0.0);
  EXPECT_DOUBLE_EQ(out(0, 0), -1.5);
  EXPECT_DOUBLE_EQ(out(0, 1), 2.5);
}

TEST(LayerNorm, OutputMomentsOnRandomRows) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_normal<double>(1, 37, rng, 3.0);
    const Matrix out = layer_norm(x, Matrix(1, 37, 1.0), Matrix(1, 37, 0.0), 1e-12);
    double mean = 0.0, var = 0.0;
    for (double v : out.values()) mean += v;
    mean /= 37.0;
    for (double v : out.values()) var += (v - mean) * (v - mean);
    var /= 37.0;
    EXPECT_LE(std::abs(mean), 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-6);
  }
}

TEST(LayerNorm, RowsVariantMatchesSingleRow) {
  Rng rng(2);
  const Matrix x = random_normal<double>(4, 6, rng);
  const Matrix gain = random_normal<double>(1, 6, rng);
  const Matrix bias = random_normal<double>(1, 6, rng);
  const Matrix all = layer_norm_rows(x, gain, bias);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(all.row_matrix(r), layer_norm(x.row_matrix(r), gain, bias));
  EXPECT_THROW(layer_norm(x.row_matrix(0), Matrix(1, 5, 1.0), bias), ShapeError);
}

TEST(Init, ZerosAndGlorotBounds) {
  const Matrix z = zeros(2, 3);
  EXPECT_EQ(z.size(), 6u);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  Rng rng(7);
  const Matrix w = glorot_uniform<double>(4, 4, rng);
  const double bound = std::sqrt(6.0 / 8.0);
  EXPECT_NEAR(bound, 0.866, 1e-3);
  for (double v : w.values()) {
    EXPECT_GE(v, -bound);
    EXPECT_LE(v, bound);
  }
}

TEST(Init, SameSeedSameMatrix) {
  Rng a(7), b(7), c(8);
  const Matrix wa = glorot_uniform<double>(5, 3, a);
  EXPECT_EQ(wa, glorot_uniform<double>(5, 3, b));
  EXPECT_NE(wa, glorot_uniform<double>(5, 3, c));
}

TEST(Init, RandomOrthogonalIsOrthogonal) {
  Rng rng(1);
  const Matrix q = random_orthogonal<double>(16, rng);
  EXPECT_LE(max_abs_diff(matmul_tn(q, q), identity(16)), 1e-12);
}

TEST(Matrix, ConstructionChecksDataLength) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  const Matrix m(2, 2, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(m(1, 0), 3.0);
}

TEST(Reductions, NormsAndFiniteness) {
  const Matrix m = Matrix::from_rows({{3, 4}});
  EXPECT_EQ(squared_norm(m), 25.0);
  EXPECT_EQ(frobenius_norm(m), 5.0);
  EXPECT_TRUE(all_finite(m));
  EXPECT_FALSE(all_finite(Matrix::from_rows({{1, std::nan("")}})));
}

}  // namespace
}  // namespace lrn

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "tdk/tensor.hpp"
#include "test_support.hpp"

namespace tdk {
namespace {

using testing::index_of;
using testing::max_abs_diff;
using testing::random_matrix;
using testing::random_tensor;
using testing::unfold_column;

Tensor counting(const Dims& dims) {
  std::vector<double> v(element_count(dims));
  std::iota(v.begin(), v.end(), 1.0);
  return Tensor(dims, v);
}

TEST(Tensor, FirstModeVariesFastest) {
  const Tensor t = counting({2, 3, 4});
  EXPECT_EQ(t({0, 0, 0}), 1.0);
  EXPECT_EQ(t({1, 0, 0}), 2.0);
  EXPECT_EQ(t({0, 1, 0}), 3.0);
  EXPECT_EQ(t({0, 0, 1}), 7.0);
  EXPECT_EQ(t({1, 2, 3}), 24.0);
}

TEST(Tensor, UnfoldSmallCube) {
  // X(i,j,k) = 1 + i + 2j + 4k
  const Tensor t = counting({2, 2, 2});
  Matrix m0(2, 4), m1(2, 4), m2(2, 4);
  m0 << 1, 3, 5, 7, 2, 4, 6, 8;
  m1 << 1, 2, 5, 6, 3, 4, 7, 8;
  m2 << 1, 2, 3, 4, 5, 6, 7, 8;
  EXPECT_EQ(unfold(t, 0), m0);
  EXPECT_EQ(unfold(t, 1), m1);
  EXPECT_EQ(unfold(t, 2), m2);
}

TEST(Tensor, UnfoldMatchesIndexOracle) {
  const Dims dims{3, 4, 2, 5};
  const Tensor t = random_tensor(dims, 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const Matrix u = unfold(t, k);
    ASSERT_EQ(static_cast<std::size_t>(u.rows()), dims[k]);
    ASSERT_EQ(static_cast<std::size_t>(u.cols()), t.size() / dims[k]);
    for (std::size_t off = 0; off < t.size(); ++off) {
      const auto idx = index_of(off, dims);
      ASSERT_EQ(u(idx[k], unfold_column(idx, dims, k)), t.data()[off]);
    }
  }
}

TEST(Tensor, FoldInvertsUnfold) {
  const Dims dims{4, 3, 5};
  const Tensor t = random_tensor(dims, 2);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(fold(unfold(t, k), k, dims), t);
}

TEST(Tensor, ModeProductByIdentity) {
  const Tensor t = random_tensor({3, 4, 5}, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(mode_product(t, Matrix::Identity(t.dim(k), t.dim(k)), k), t);
  }
}

TEST(Tensor, ModeProductByOnesRowSums) {
  const Tensor t = random_tensor({3, 4}, 4);
  const Tensor s = mode_product(t, Matrix::Ones(1, 4), 1);
  ASSERT_EQ(s.dims(), (Dims{3, 1}));
  for (std::size_t i = 0; i < 3; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 4; ++j) row += t({i, j});
    EXPECT_NEAR(s({i, 0}), row, 1e-14);
  }
}

TEST(Tensor, ModeProductMatchesUnfoldedOracle) {
  const Dims dims{3, 4, 5};
  const Tensor t = random_tensor(dims, 5);
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix m = random_matrix(2, static_cast<Eigen::Index>(dims[k]), 6 + k);
    Dims out = dims;
    out[k] = 2;
    const Tensor expect = fold(m * unfold(t, k), k, out);
    EXPECT_LT(max_abs_diff(mode_product(t, m, k), expect), 1e-13);
    const Matrix mt = m.transpose();
    EXPECT_LT(max_abs_diff(mode_product_transposed(t, mt, k), expect), 1e-13);
  }
}

TEST(Tensor, ModeProductSameModeComposes) {
  const Tensor t = random_tensor({3, 4, 5}, 7);
  const Matrix a = random_matrix(6, 4, 8);
  const Matrix b = random_matrix(2, 6, 9);
  const Matrix ba = b * a;
  EXPECT_LT(max_abs_diff(mode_product(mode_product(t, a, 1), b, 1), mode_product(t, ba, 1)), 1e-12);
}

TEST(Tensor, DistinctModesCommute) {
  const Tensor t = random_tensor({3, 4, 5}, 10);
  const Matrix a = random_matrix(2, 3, 11);
  const Matrix c = random_matrix(6, 5, 12);
  EXPECT_LT(max_abs_diff(mode_product(mode_product(t, a, 0), c, 2), mode_product(mode_product(t, c, 2), a, 0)),
            1e-12);
}

TEST(Tensor, MultiModeProductSkipsMode) {
  const Tensor t = random_tensor({3, 4, 5}, 13);
  std::vector<Matrix> m{random_matrix(2, 3, 14), random_matrix(3, 4, 15), random_matrix(2, 5, 16)};
  const Tensor all = multi_mode_product(t, m);
  EXPECT_EQ(all.dims(), (Dims{2, 3, 2}));
  const Tensor manual = mode_product(mode_product(mode_product(t, m[0], 0), m[1], 1), m[2], 2);
  EXPECT_LT(max_abs_diff(all, manual), 1e-12);
  const Tensor skip1 = multi_mode_product(t, m, 1);
  EXPECT_EQ(skip1.dims(), (Dims{2, 4, 2}));
  EXPECT_LT(max_abs_diff(skip1, mode_product(mode_product(t, m[0], 0), m[2], 2)), 1e-12);

  std::vector<Matrix> mt;
  for (const auto& x : m) mt.push_back(x.transpose());
  EXPECT_LT(max_abs_diff(multi_mode_product_transposed(t, mt), all), 1e-12);
  EXPECT_LT(max_abs_diff(multi_mode_product_transposed(t, mt, 1), skip1), 1e-12);
}

TEST(Tensor, FrobeniusNorm) {
  EXPECT_DOUBLE_EQ(frobenius_norm(Tensor({2, 2}, {3, 0, 0, 4})), 5.0);
  EXPECT_EQ(frobenius_norm(Tensor({3, 2})), 0.0);
  const Tensor t = random_tensor({3, 4, 5}, 17);
  EXPECT_NEAR(squared_norm(t), vectorize(t).squaredNorm(), 1e-12);
  EXPECT_NEAR(squared_norm(t), unfold(t, 1).squaredNorm(), 1e-12);
}

TEST(Tensor, VectorizeRoundTrip) {
  const Tensor t = counting({2, 3});
  const Vector v = vectorize(t);
  for (Eigen::Index i = 0; i < v.size(); ++i) EXPECT_EQ(v(i), static_cast<double>(i + 1));
  EXPECT_EQ(devectorize(v, t.dims()), t);
}

TEST(Tensor, OrthonormalProjectionsPreserveNorm) {
  const Tensor t = random_tensor({4, 5, 3}, 18);
  std::vector<Matrix> q{testing::random_orthonormal(4, 4, 19), testing::random_orthonormal(5, 5, 20),
                        testing::random_orthonormal(3, 3, 21)};
  EXPECT_NEAR(squared_norm(multi_mode_product_transposed(t, q)), squared_norm(t), 1e-11);
  // Projecting onto a subspace cannot increase the norm.
  std::vector<Matrix> p{testing::random_orthonormal(4, 2, 22), testing::random_orthonormal(5, 3, 23),
                        testing::random_orthonormal(3, 1, 24)};
  EXPECT_LE(squared_norm(multi_mode_product_transposed(t, p)), squared_norm(t));
}

TEST(Tensor, VectorizationOfMultiModeProductIsKronecker) {
  const Tensor g = random_tensor({2, 3}, 25);
  const Matrix a = random_matrix(4, 2, 26);
  const Matrix b = random_matrix(5, 3, 27);
  std::vector<Matrix> m{a, b};
  const Vector got = vectorize(multi_mode_product(g, m));
  Matrix kron(20, 6);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) kron.block(i * 4, j * 2, 4, 2) = b(i, j) * a;
  EXPECT_LT((got - kron * vectorize(g)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tensor, CrossGramMatchesUnfoldings) {
  const Tensor a = random_tensor({4, 3, 5}, 28);
  const Tensor b = random_tensor({2, 3, 5}, 29);
  const Matrix expect = unfold(a, 0) * unfold(b, 0).transpose();
  EXPECT_LT((mode_cross_gram(a, b, 0) - expect).cwiseAbs().maxCoeff(), 1e-12);
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix u = unfold(a, k);
    EXPECT_LT((mode_gram(a, k) - u * u.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
  Matrix acc = Matrix::Identity(3, 3);
  accumulate_mode_gram(a, 1, acc, 0.5);
  const Matrix u1 = unfold(a, 1);
  EXPECT_LT((acc - Matrix::Identity(3, 3) - 0.5 * u1 * u1.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(mode_cross_gram(a, b, 1), std::invalid_argument);
}

TEST(Tensor, OuterProduct) {
  Vector a(2), b(3);
  a << 1, 2;
  b << 3, 4, 5;
  std::vector<Vector> f{a, b};
  const Tensor t = outer_product(f);
  ASSERT_EQ(t.dims(), (Dims{2, 3}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t({i, j}), a(i) * b(j));
}

TEST(Tensor, Arithmetic) {
  const Tensor a = counting({2, 2});
  const Tensor b = 2.0 * a;
  EXPECT_EQ(b - a, a);
  EXPECT_EQ(a + a, b);
  Tensor c = a;
  c *= 3.0;
  c -= b;
  EXPECT_EQ(c, a);
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor(Dims{}), std::invalid_argument);
  EXPECT_THROW(Tensor(Dims{2, 0}), std::invalid_argument);
  EXPECT_THROW(Tensor(Dims{2, 2}, std::vector<double>(3)), std::invalid_argument);
  const Tensor t = counting({2, 3});
  EXPECT_THROW(t({2, 0}), std::out_of_range);
  EXPECT_THROW(t({0}), std::invalid_argument);
  EXPECT_THROW(unfold(t, 2), std::out_of_range);
  EXPECT_THROW(mode_product(t, Matrix::Identity(2, 2), 1), std::invalid_argument);
  EXPECT_THROW(mode_product_transposed(t, Matrix::Identity(2, 2), 1), std::invalid_argument);
  EXPECT_THROW(fold(Matrix::Zero(2, 2), 0, Dims{2, 3}), std::invalid_argument);
  Tensor u = counting({3, 2});
  EXPECT_THROW(u += t, std::invalid_argument);
  std::vector<Matrix> one{Matrix::Identity(2, 2)};
  EXPECT_THROW(multi_mode_product(t, one), std::invalid_argument);
}

}  // namespace
}  // namespace tdk

#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "tdk/forward_model.hpp"
#include "tdk/hoda.hpp"
#include "tdk/synthetic.hpp"
#include "test_support.hpp"

namespace tdk {
namespace {

using testing::random_matrix;
using testing::random_orthonormal;
using testing::random_tensor;

double total_error(std::span<const Tensor> x, std::span<const Tensor> g, std::span<const Matrix> a) {
  double e = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) e += squared_norm(x[n] - reconstruct(g[n], a));
  return e;
}

TEST(ForwardModel, LosslessForFullRankOrthogonalProjections) {
  std::vector<Matrix> u{random_orthonormal(4, 4, 1), random_orthonormal(3, 3, 2)};
  std::vector<Tensor> x, g;
  for (std::size_t n = 0; n < 10; ++n) {
    x.push_back(random_tensor({4, 3}, 10 + n));
    g.push_back(multi_mode_product_transposed(x.back(), u));
  }
  const ActivationSet a = fit_hoda_forward(g, x, u);
  EXPECT_TRUE(a.converged);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LT((a.patterns[k] - u[k]).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(total_error(x, g, a.patterns), 1e-20);
}

TEST(ForwardModel, SingleSampleRankOneIsLeadingSingularPair) {
  // With a unit latent the fit is the best rank-1 approximation a_0 a_1ᵀ.
  Matrix xm = random_matrix(5, 4, 3);
  Eigen::JacobiSVD<Matrix> svd0(xm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd0.singularValues();
  s(0) *= 3.0;  // widen the gap so ALS converges quickly
  xm = svd0.matrixU() * s.asDiagonal() * svd0.matrixV().transpose();
  Tensor x({5, 4});
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i = 0; i < 5; ++i) x({i, j}) = xm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  std::vector<Tensor> xs{x}, gs{Tensor({1, 1}, {1.0})};
  std::vector<Matrix> init{Matrix::Ones(5, 1), Matrix::Ones(4, 1)};
  const ActivationSet a = fit_hoda_forward(gs, xs, init);
  EXPECT_TRUE(a.converged);
  const Matrix approx = a.patterns[0] * a.patterns[1].transpose();
  const Matrix best = s(0) * svd0.matrixU().col(0) * svd0.matrixV().col(0).transpose();
  EXPECT_LT((approx - best).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_NEAR(total_error(xs, gs, a.patterns), xm.squaredNorm() - s(0) * s(0), 1e-8 * xm.squaredNorm());
}

TEST(ForwardModel, ZeroLatentsGiveZeroPatterns) {
  std::vector<Tensor> x{random_tensor({3, 2}, 4), random_tensor({3, 2}, 5)};
  std::vector<Tensor> g{Tensor({1, 1}), Tensor({1, 1})};
  std::vector<Matrix> init{Matrix::Ones(3, 1), Matrix::Ones(2, 1)};
  const ActivationSet a = fit_hoda_forward(g, x, init);
  for (const auto& p : a.patterns) {
    EXPECT_TRUE(p.allFinite());
    EXPECT_EQ(p.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ForwardModel, CollinearLatentsUseRidge) {
  // Both latent components always equal: the mode-0 Gram is singular.
  std::vector<Tensor> x, g;
  for (std::size_t n = 0; n < 8; ++n) {
    x.push_back(random_tensor({4, 3}, 20 + n));
    const double v = std::cos(static_cast<double>(n));
    g.push_back(Tensor({2, 1}, {v, v}));
  }
  std::vector<Matrix> init{random_matrix(4, 2, 6), Matrix::Ones(3, 1)};
  FitOptions o;
  o.max_iterations = 5;
  const ActivationSet a = fit_hoda_forward(g, x, init, o);
  EXPECT_TRUE(a.ridge_used[0]);
  for (const auto& p : a.patterns) EXPECT_TRUE(p.allFinite());
}

TEST(Reconstruct, MatchesKroneckerOracle) {
  const Tensor g = random_tensor({2, 3, 2}, 7);
  std::vector<Matrix> a{random_matrix(4, 2, 8), random_matrix(5, 3, 9), random_matrix(3, 2, 10)};
  const Tensor x = reconstruct(g, a);
  ASSERT_EQ(x.dims(), (Dims{4, 5, 3}));
  // vec(G ×_0 A0 ×_1 A1 ×_2 A2) = (A2 ⊗ A1 ⊗ A0) vec(G)
  auto kron = [](const Matrix& p, const Matrix& q) {
    Matrix out(p.rows() * q.rows(), p.cols() * q.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) out.block(i * q.rows(), j * q.cols(), q.rows(), q.cols()) = p(i, j) * q;
    return out;
  };
  const Vector expect = kron(kron(a[2], a[1]), a[0]) * vectorize(g);
  EXPECT_LT((vectorize(x) - expect).cwiseAbs().maxCoeff(), 1e-12);

  std::vector<Matrix> wrong{random_matrix(4, 3, 11), a[1], a[2]};
  EXPECT_THROW(reconstruct(g, wrong), std::invalid_argument);
}

class ForwardOnHoda : public ::testing::Test {
 protected:
  void SetUp() override {
    data = generate_synthetic(planted_config({6, 10}, 50, 2, 1.0, 1.0, 12));
    const std::vector<std::size_t> ranks{2, 3};
    model = fit_hoda_backward(data, ranks);
    for (const auto& x : data.samples) latents.push_back(hoda_transform(model, x));
  }
  LabeledDataset data;
  HodaModel model;
  std::vector<Tensor> latents;
};

TEST_F(ForwardOnHoda, ErrorNeverIncreases) {
  const ActivationSet a = fit_hoda_forward(latents, data.samples, model.projections);
  ASSERT_FALSE(a.error_history.empty());
  for (std::size_t i = 1; i < a.error_history.size(); ++i) {
    EXPECT_LE(a.error_history[i], a.error_history[i - 1] * (1 + 1e-12)) << i;
  }
  EXPECT_NEAR(a.error_history.back(), total_error(data.samples, latents, a.patterns),
              1e-9 * a.error_history.back());
}

TEST_F(ForwardOnHoda, ConvergedPatternsAreStationary) {
  const ActivationSet a = fit_hoda_forward(latents, data.samples, model.projections);
  EXPECT_TRUE(a.converged);
  ASSERT_EQ(a.residuals.size(), 2u);
  for (double r : a.residuals) EXPECT_LT(r, 1e-8);
  const auto recomputed = normal_equation_residuals(latents, data.samples, a.patterns);
  EXPECT_EQ(recomputed, a.residuals);
  // Improves on the backward projections used as the starting point.
  EXPECT_LE(total_error(data.samples, latents, a.patterns), total_error(data.samples, latents, model.projections));
}

TEST_F(ForwardOnHoda, IterationCapIsHonoured) {
  FitOptions o;
  o.max_iterations = 1;
  const ActivationSet a = fit_hoda_forward(latents, data.samples, model.projections, o);
  EXPECT_EQ(a.iterations, 1);
  EXPECT_EQ(a.residuals.size(), 2u);
}

TEST(ForwardModel, ValidatesInput) {
  std::vector<Tensor> x{random_tensor({3, 2}, 1)};
  std::vector<Tensor> g{Tensor({1, 1}, {1.0})};
  std::vector<Matrix> bad{Matrix::Ones(2, 1), Matrix::Ones(2, 1)};
  EXPECT_THROW(fit_hoda_forward(g, x, bad), std::invalid_argument);
  std::vector<Tensor> none;
  std::vector<Matrix> ok{Matrix::Ones(3, 1), Matrix::Ones(2, 1)};
  EXPECT_THROW(fit_hoda_forward(none, none, ok), std::invalid_argument);
  std::vector<Tensor> two{x[0], x[0]};
  EXPECT_THROW(fit_hoda_forward(g, two, ok), std::invalid_argument);
}

}  // namespace
}  // namespace tdk

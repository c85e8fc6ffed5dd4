#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tdk/bttda.hpp"
#include "tdk/synthetic.hpp"
#include "test_support.hpp"

namespace tdk {
namespace {

using Ranks = std::vector<std::size_t>;

LabeledDataset planted(std::uint64_t seed, std::size_t per_class = 40) {
  return generate_synthetic(planted_config({6, 10}, per_class, 2, 1.0, 1.0, seed));
}

std::size_t product(const Ranks& r) {
  std::size_t p = 1;
  for (auto v : r) p *= v;
  return p;
}

TEST(SelectRanks, EnergyThreshold) {
  // Mode-0 scatter diag(9, 1): cumulative fractions 0.9, 1.0.
  std::vector<Tensor> x{Tensor({2, 1}, {3, 0}), Tensor({2, 1}, {0, 1})};
  EXPECT_EQ(select_ranks(x, 0.0), (Ranks{1, 1}));
  EXPECT_EQ(select_ranks(x, 0.8), (Ranks{1, 1}));
  EXPECT_EQ(select_ranks(x, 0.9), (Ranks{2, 1}));  // strictly greater
  EXPECT_EQ(select_ranks(x, 0.95), (Ranks{2, 1}));
  EXPECT_EQ(select_ranks(x, 1.0), (Ranks{2, 1}));
  EXPECT_THROW(select_ranks(x, -0.1), std::invalid_argument);
  EXPECT_THROW(select_ranks(x, 1.1), std::invalid_argument);
}

TEST(SelectRanks, ZeroEnergyModeGetsRankOne) {
  std::vector<Tensor> x{Tensor({3, 2}), Tensor({3, 2})};
  EXPECT_EQ(select_ranks(x, 0.5), (Ranks{1, 1}));
  EXPECT_EQ(select_ranks(x, 1.0), (Ranks{3, 2}));
}

TEST(SelectRanks, MonotoneInTheta) {
  const LabeledDataset data = planted(1);
  Ranks prev = select_ranks(data.samples, 0.0);
  for (double t = 0.1; t <= 1.0 + 1e-12; t += 0.1) {
    const Ranks r = select_ranks(data.samples, std::min(t, 1.0));
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_GE(r[k], prev[k]);
    prev = r;
  }
}

TEST(Bttda, SingleBlockIsHoda) {
  const LabeledDataset data = planted(2);
  const BttdaFit fit = fit_bttda(data, 1, 0.5);
  const Ranks ranks = select_ranks(data.samples, 0.5);
  const HodaModel hoda = fit_hoda_backward(data, ranks);
  ASSERT_EQ(fit.model.blocks.size(), 1u);
  EXPECT_EQ(fit.model.blocks[0].ranks, ranks);
  ASSERT_EQ(static_cast<std::size_t>(fit.features.cols()), product(ranks));
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Vector h = vectorize(hoda_transform(hoda, data.samples[n]));
    EXPECT_LT((fit.features.row(static_cast<Eigen::Index>(n)).transpose() - h).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Bttda, ThetaZeroGivesRankOneBlocks) {
  const LabeledDataset data = planted(3);
  const BttdaFit fit = fit_bttda(data, 3, 0.0);
  ASSERT_EQ(fit.model.blocks.size(), 3u);
  for (const Block& b : fit.model.blocks) EXPECT_EQ(b.ranks, (Ranks{1, 1}));
  EXPECT_EQ(fit.model.feature_count(), 3u);
  EXPECT_EQ(fit.features.cols(), 3);
  EXPECT_EQ(static_cast<std::size_t>(fit.features.rows()), data.size());
}

TEST(Bttda, FeatureCountSumsBlockRanks) {
  const LabeledDataset data = planted(4);
  const BttdaFit fit = fit_bttda(data, 3, 0.3);
  std::size_t expect = 0;
  for (const Block& b : fit.model.blocks) expect += product(b.ranks);
  EXPECT_EQ(fit.model.feature_count(), expect);
  EXPECT_EQ(static_cast<std::size_t>(fit.features.cols()), expect);
  EXPECT_EQ(feature_prefix_length(fit.model, 0), 0u);
  EXPECT_EQ(feature_prefix_length(fit.model, 1), product(fit.model.blocks[0].ranks));
  EXPECT_THROW(feature_prefix_length(fit.model, 4), std::invalid_argument);
}

TEST(Bttda, TrainingNmseNonIncreasing) {
  const LabeledDataset data = planted(5);
  for (double theta : {0.0, 0.1, 0.4}) {
    const BttdaFit fit = fit_bttda(data, 6, theta);
    const auto traj = fit.model.nmse_trajectory();
    ASSERT_EQ(traj.size(), 6u);
    EXPECT_LE(traj[0], 1.0);
    for (std::size_t b = 1; b < traj.size(); ++b) EXPECT_LE(traj[b], traj[b - 1] + 1e-12) << theta << " " << b;
  }
}

TEST(Bttda, TransformReplaysTrainingFeatures) {
  const LabeledDataset data = planted(6);
  const BttdaFit fit = fit_bttda(data, 4, 0.2);
  const Matrix replay = bttda_transform(fit.model, data.samples);
  EXPECT_LT((replay - fit.features).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(bttda_transform(fit.model, Tensor({10, 6})), std::invalid_argument);
}

TEST(Bttda, TruncationEqualsRefit) {
  const LabeledDataset data = planted(7);
  const BttdaFit big = fit_bttda(data, 8, 0.1);
  const BttdaFit small = fit_bttda(data, 3, 0.1);
  const BttdaModel cut = truncate_blocks(big.model, 3);
  const Matrix a = bttda_transform(cut, data.samples);
  const Matrix b = bttda_transform(small.model, data.samples);
  EXPECT_EQ(a, b);
  const auto width = static_cast<Eigen::Index>(feature_prefix_length(big.model, 3));
  EXPECT_EQ(big.features.leftCols(width), small.features);
  EXPECT_THROW(truncate_blocks(big.model, 0), std::invalid_argument);
  EXPECT_THROW(truncate_blocks(big.model, 9), std::invalid_argument);
}

TEST(Bttda, FullRankBlockIsLosslessAndTruncates) {
  const LabeledDataset data = planted(8, 20);
  const BttdaFit fit = fit_bttda(data, 4, 1.0);
  EXPECT_TRUE(fit.model.truncated_to_single_block);
  ASSERT_EQ(fit.model.blocks.size(), 1u);
  EXPECT_EQ(fit.model.blocks[0].ranks, (Ranks{6, 10}));
  EXPECT_LE(fit.model.blocks[0].training_nmse, 1e-20);
  EXPECT_FALSE(fit_bttda(data, 1, 1.0).model.truncated_to_single_block);
}

TEST(Bttda, ProjectionsStayOrthonormal) {
  const LabeledDataset data = planted(9);
  const BttdaFit fit = fit_bttda(data, 4, 0.3);
  for (const Block& b : fit.model.blocks)
    for (const Matrix& u : b.backward.projections) EXPECT_LT(testing::orthonormality_error(u), 1e-10);
}

TEST(Bttda, RejectsBadInput) {
  const LabeledDataset data = planted(10, 5);
  EXPECT_THROW(fit_bttda(data, 0, 0.0), std::invalid_argument);
  EXPECT_THROW(fit_bttda(data, 1, 1.5), std::invalid_argument);
  LabeledDataset zeros = data;
  for (auto& t : zeros.samples) t *= 0.0;
  EXPECT_THROW(fit_bttda(zeros, 1, 0.0), std::invalid_argument);
}

TEST(Nmse, Cases) {
  std::vector<Tensor> x{Tensor({2}, {1, 1}), Tensor({2}, {2, 0})};
  EXPECT_EQ(nmse(x, x), 0.0);
  std::vector<Tensor> zero{Tensor({2}), Tensor({2})};
  EXPECT_DOUBLE_EQ(nmse(x, zero), 1.0);
  std::vector<Tensor> half{0.5 * x[0], 0.5 * x[1]};
  EXPECT_DOUBLE_EQ(nmse(x, half), 0.25);
  EXPECT_THROW(nmse(zero, zero), std::domain_error);
}

TEST(Bttda, Deterministic) {
  const LabeledDataset data = planted(11);
  const BttdaFit a = fit_bttda(data, 3, 0.2);
  const BttdaFit b = fit_bttda(data, 3, 0.2);
  EXPECT_EQ(a.features, b.features);
}

}  // namespace
}  // namespace tdk

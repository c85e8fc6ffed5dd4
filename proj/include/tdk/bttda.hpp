#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdk/dataset.hpp"
#include "tdk/discriminant.hpp"
#include "tdk/forward_model.hpp"
#include "tdk/hoda.hpp"

namespace tdk {

/// One deflation step: backward projections fitted on the residual of the
/// previous blocks plus the activation patterns reconstructing that residual.
struct Block {
  HodaModel backward;
  ActivationSet forward;
  std::vector<std::size_t> ranks;
  /// Training NMSE of the residual left after this block.
  double training_nmse = 0.0;

  std::size_t feature_count() const;
};

struct BttdaModel {
  Dims input_dims;
  double theta = 0.0;
  std::vector<Block> blocks;
  /// Set when θ = 1 forced the block count down to one.
  bool truncated_to_single_block = false;

  std::size_t feature_count() const;
  std::vector<double> nmse_trajectory() const;
};

struct BttdaFit {
  BttdaModel model;
  /// Training features, one row per sample, in block order.
  Matrix features;
};

/// Per-mode block ranks from the eigenvalue energy of each mode's total
/// scatter: θ = 0 gives all ones, θ = 1 full rank, otherwise the smallest R
/// whose cumulative eigenvalue fraction strictly exceeds θ.
std::vector<std::size_t> select_ranks(std::span<const Tensor> residuals, double theta);

BttdaFit fit_bttda(const LabeledDataset& data, std::size_t blocks, double theta,
                   const FitOptions& opts = {});

/// Replays the deflation on one sample and concatenates the block latents.
Vector bttda_transform(const BttdaModel& model, const Tensor& t);
/// Row-per-sample feature matrix.
Matrix bttda_transform(const BttdaModel& model, std::span<const Tensor> samples);

/// The first `blocks` blocks of `model`. Identical to fitting with that many
/// blocks, since deflation never looks ahead.
BttdaModel truncate_blocks(const BttdaModel& model, std::size_t blocks);

/// Columns of the feature matrix produced by the first `blocks` blocks.
std::size_t feature_prefix_length(const BttdaModel& model, std::size_t blocks);

/// Σ‖X - X̂‖² / Σ‖X‖².
double nmse(std::span<const Tensor> originals, std::span<const Tensor> reconstructions);

/// Class statistics of each block's latent tensors on `data`.
std::vector<ClassStats> block_latent_statistics(const BttdaModel& model, const LabeledDataset& data);

}  // namespace tdk

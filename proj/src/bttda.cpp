#include "tdk/bttda.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tdk {
namespace {

constexpr double kZeroEnergy = 1e-12;

std::size_t product(const std::vector<std::size_t>& ranks) { return element_count(ranks); }

}  // namespace

std::size_t Block::feature_count() const { return product(ranks); }

std::size_t BttdaModel::feature_count() const { return feature_prefix_length(*this, blocks.size()); }

std::vector<double> BttdaModel::nmse_trajectory() const {
  std::vector<double> out;
  out.reserve(blocks.size());
  for (const Block& b : blocks) out.push_back(b.training_nmse);
  return out;
}

std::vector<std::size_t> select_ranks(std::span<const Tensor> residuals, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (residuals.empty()) throw std::invalid_argument("select_ranks: no samples");
  const Dims& dims = residuals.front().dims();
  std::vector<std::size_t> ranks(dims.size(), 1);
  if (theta == 0.0) return ranks;
  if (theta == 1.0) return dims;

  for (std::size_t k = 0; k < dims.size(); ++k) {
    const Matrix scatter = total_scatter(residuals, k);
    if (scatter.trace() < kZeroEnergy * static_cast<double>(residuals.size())) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter, Eigen::EigenvaluesOnly);
    // Eigen returns ascending order; scatter is PSD so clip rounding negatives.
    Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
    const double energy = values.sum();
    double running = 0.0;
    std::size_t r = dims[k];
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      running += values[i];
      if (running / energy > theta) {
        r = static_cast<std::size_t>(i) + 1;
        break;
      }
    }
    ranks[k] = r;
  }
  return ranks;
}

BttdaFit fit_bttda(const LabeledDataset& data, std::size_t blocks, double theta, const FitOptions& opts) {
  if (blocks < 1) throw std::invalid_argument("fit_bttda: need at least one block");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("fit_bttda: theta must lie in [0, 1]");
  data.validate();

  BttdaFit fit;
  BttdaModel& model = fit.model;
  model.input_dims = data.dims();
  model.theta = theta;
  if (theta == 1.0 && blocks > 1) {
    // A full-rank block reconstructs the data exactly; nothing is left to deflate.
    blocks = 1;
    model.truncated_to_single_block = true;
  }

  double data_energy = 0.0;
  for (const Tensor& t : data.samples) data_energy += squared_norm(t);
  if (!(data_energy > 0.0)) throw std::invalid_argument("fit_bttda: all samples are zero");

  LabeledDataset residual = data;
  for (std::size_t b = 0; b < blocks; ++b) {
    Block block;
    block.ranks = select_ranks(residual.samples, theta);
    block.backward = fit_hoda_backward(residual, block.ranks, opts);

    std::vector<Tensor> latents;
    latents.reserve(residual.size());
    for (const Tensor& e : residual.samples) latents.push_back(hoda_transform(block.backward, e));

    block.forward = fit_hoda_forward(latents, residual.samples, block.backward.projections, opts);

    double remaining = 0.0;
    for (std::size_t n = 0; n < residual.size(); ++n) {
      residual.samples[n] -= reconstruct(latents[n], block.forward.patterns);
      remaining += squared_norm(residual.samples[n]);
    }
    block.training_nmse = remaining / data_energy;

    Matrix f(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(block.feature_count()));
    for (std::size_t n = 0; n < latents.size(); ++n) f.row(static_cast<Eigen::Index>(n)) = vectorize(latents[n]).transpose();
    model.blocks.push_back(std::move(block));
    fit.features.conservativeResize(f.rows(), fit.features.cols() + f.cols());
    fit.features.rightCols(f.cols()) = f;
  }
  return fit;
}

Vector bttda_transform(const BttdaModel& model, const Tensor& t) {
  if (t.dims() != model.input_dims) throw std::invalid_argument("bttda_transform: input shape mismatch");
  Vector out(static_cast<Eigen::Index>(model.feature_count()));
  Tensor residual = t;
  Eigen::Index offset = 0;
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    const Block& block = model.blocks[b];
    const Tensor latent = hoda_transform(block.backward, residual);
    out.segment(offset, static_cast<Eigen::Index>(latent.size())) = vectorize(latent);
    offset += static_cast<Eigen::Index>(latent.size());
    if (b + 1 < model.blocks.size()) residual -= reconstruct(latent, block.forward.patterns);
  }
  return out;
}

Matrix bttda_transform(const BttdaModel& model, std::span<const Tensor> samples) {
  Matrix out(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(model.feature_count()));
  for (std::size_t n = 0; n < samples.size(); ++n) {
    out.row(static_cast<Eigen::Index>(n)) = bttda_transform(model, samples[n]).transpose();
  }
  return out;
}

BttdaModel truncate_blocks(const BttdaModel& model, std::size_t blocks) {
  if (blocks < 1 || blocks > model.blocks.size()) {
    throw std::invalid_argument("truncate_blocks: cannot keep " + std::to_string(blocks) + " of " +
                                std::to_string(model.blocks.size()) + " blocks");
  }
  BttdaModel out = model;
  out.blocks.resize(blocks);
  return out;
}

std::size_t feature_prefix_length(const BttdaModel& model, std::size_t blocks) {
  if (blocks > model.blocks.size()) throw std::invalid_argument("feature_prefix_length: too many blocks");
  std::size_t total = 0;
  for (std::size_t b = 0; b < blocks; ++b) total += model.blocks[b].feature_count();
  return total;
}

double nmse(std::span<const Tensor> originals, std::span<const Tensor> reconstructions) {
  if (originals.size() != reconstructions.size()) throw std::invalid_argument("nmse: list lengths differ");
  double error = 0.0;
  double energy = 0.0;
  for (std::size_t n = 0; n < originals.size(); ++n) {
    if (originals[n].dims() != reconstructions[n].dims()) throw std::invalid_argument("nmse: shape mismatch");
    error += squared_norm(originals[n] - reconstructions[n]);
    energy += squared_norm(originals[n]);
  }
  if (!(energy > 0.0)) throw std::domain_error("nmse: undefined for all-zero originals");
  return error / energy;
}

std::vector<ClassStats> block_latent_statistics(const BttdaModel& model, const LabeledDataset& data) {
  data.validate();
  std::vector<Tensor> residual = data.samples;
  std::vector<ClassStats> out;
  out.reserve(model.blocks.size());
  for (const Block& block : model.blocks) {
    std::vector<Tensor> latents;
    latents.reserve(residual.size());
    for (const Tensor& e : residual) latents.push_back(hoda_transform(block.backward, e));
    out.push_back(class_statistics(latents, data.labels));
    for (std::size_t n = 0; n < residual.size(); ++n) residual[n] -= reconstruct(latents[n], block.forward.patterns);
  }
  return out;
}

}  // namespace tdk

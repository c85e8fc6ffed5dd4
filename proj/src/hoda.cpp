#include "tdk/hoda.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tdk/rng.hpp"

namespace tdk {
namespace {

void check_ranks(const Dims& dims, std::span<const std::size_t> ranks) {
  if (ranks.size() != dims.size()) {
    throw std::invalid_argument("expected " + std::to_string(dims.size()) + " ranks, got " +
                                std::to_string(ranks.size()));
  }
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (ranks[k] < 1 || ranks[k] > dims[k]) {
      throw std::invalid_argument("rank " + std::to_string(ranks[k]) + " invalid for mode " +
                                  std::to_string(k) + " of dimension " + std::to_string(dims[k]));
    }
  }
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, CounterRng& rng) {
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  // Fix the column signs so Q does not depend on the QR sign convention.
  const Matrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

double projector_distance(const Matrix& a, const Matrix& b) {
  return (a * a.transpose() - b * b.transpose()).norm();
}

double fisher_ratio_or_nan(std::span<const Tensor> latents, std::span<const int> labels) {
  try {
    return fisher_ratio(latents, labels);
  } catch (const std::domain_error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<Tensor> project_all(std::span<const Tensor> samples, std::span<const Matrix> projections) {
  std::vector<Tensor> out;
  out.reserve(samples.size());
  for (const Tensor& t : samples) out.push_back(multi_mode_product_transposed(t, projections));
  return out;
}

}  // namespace

void FitOptions::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (shrinkage.kind == Shrinkage::Kind::Fixed && !(shrinkage.alpha >= 0.0 && shrinkage.alpha <= 1.0)) {
    throw std::invalid_argument("shrinkage alpha must lie in [0, 1]");
  }
}

std::vector<Matrix> init_projections(const LabeledDataset& data, std::span<const std::size_t> ranks,
                                     InitStrategy strategy, std::uint64_t seed) {
  const Dims& dims = data.dims();
  check_ranks(dims, ranks);
  std::vector<Matrix> out;
  out.reserve(dims.size());
  if (strategy == InitStrategy::SeededRandom) {
    for (std::size_t k = 0; k < dims.size(); ++k) {
      CounterRng rng(seed, {0x1417, k});
      out.push_back(random_orthonormal(dims[k], ranks[k], rng));
    }
  } else {
    for (std::size_t k = 0; k < dims.size(); ++k) {
      out.push_back(leading_eigenvectors(total_scatter(data.samples, k), ranks[k], EigenOrder::Algebraic).vectors);
    }
  }
  return out;
}

HodaModel fit_hoda_backward(const LabeledDataset& data, std::span<const std::size_t> ranks,
                            const FitOptions& opts) {
  opts.validate();
  data.validate();
  const std::size_t classes = data.class_count();
  if (classes < 2) throw std::invalid_argument("fit_hoda_backward: need at least two classes");
  if (data.size() < classes) throw std::invalid_argument("fit_hoda_backward: fewer samples than classes");
  const Dims& dims = data.dims();
  check_ranks(dims, ranks);
  const std::size_t order = dims.size();

  HodaModel model;
  model.input_dims = dims;
  model.ranks.assign(ranks.begin(), ranks.end());
  model.projections = init_projections(data, ranks, opts.init, opts.seed);

  std::vector<Matrix> total(order);
  for (std::size_t k = 0; k < order; ++k) total[k] = total_scatter(data.samples, k);

  model.diagnostics.initial_fisher_ratio =
      fisher_ratio_or_nan(project_all(data.samples, model.projections), data.labels);
  model.diagnostics.update_norms.assign(order, 0.0);

  std::vector<Tensor> partials(data.size());
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    for (std::size_t k = 0; k < order; ++k) {
      for (std::size_t n = 0; n < data.size(); ++n) {
        partials[n] = multi_mode_product_transposed(data.samples[n], model.projections, k);
      }
      const ClassStats stats = class_statistics(partials, data.labels);
      ScatterPair scatter = partial_scatters(partials, data.labels, stats, k);

      if (opts.shrinkage.kind != Shrinkage::Kind::Off) {
        double alpha = opts.shrinkage.alpha;
        if (opts.shrinkage.kind == Shrinkage::Kind::Auto) {
          std::vector<Tensor> centered;
          centered.reserve(partials.size());
          for (std::size_t n = 0; n < partials.size(); ++n) {
            centered.push_back(partials[n] - stats.class_means[static_cast<std::size_t>(data.labels[n])]);
          }
          alpha = ledoit_wolf_shrinkage(centered, k);
        }
        scatter.within = shrink_scatter(scatter.within, alpha);
      }

      const Matrix& u = model.projections[k];
      const double numerator = (u.transpose() * scatter.between * u).trace();
      const double denominator = (u.transpose() * scatter.within * u).trace();
      if (!(denominator > 0.0)) {
        throw SingularFitError("fit_hoda_backward: within-class scatter of mode " + std::to_string(k) +
                               " vanishes in the current projection (iteration " +
                               std::to_string(iter) + ")");
      }
      const double phi = numerator / denominator;

      const Matrix v =
          leading_eigenvectors(scatter.between - phi * scatter.within, ranks[k], opts.discriminant_order)
              .vectors;
      // Eigenvectors of V Vᵀ S_t V Vᵀ with nonzero eigenvalues are V q for the
      // eigenvectors q of Vᵀ S_t V; solving the small problem keeps the result
      // inside span(V) even when S_t is rank deficient there.
      const EigenResult rotation =
          leading_eigenvectors(v.transpose() * total[k] * v, ranks[k], EigenOrder::Magnitude);
      Matrix next = v * rotation.vectors;
      for (Eigen::Index j = 0; j < next.cols(); ++j) {
        Eigen::Index pivot = 0;
        for (Eigen::Index i = 1; i < next.rows(); ++i) {
          if (std::abs(next(i, j)) > std::abs(next(pivot, j))) pivot = i;
        }
        if (next(pivot, j) < 0.0) next.col(j) = -next.col(j);
      }

      model.diagnostics.update_norms[k] = projector_distance(next, u);
      model.projections[k] = std::move(next);
    }
    model.diagnostics.iterations = iter;
    bool settled = true;
    for (double d : model.diagnostics.update_norms) settled = settled && d < opts.tolerance;
    if (settled) {
      model.diagnostics.converged = true;
      break;
    }
  }

  model.diagnostics.final_fisher_ratio =
      fisher_ratio_or_nan(project_all(data.samples, model.projections), data.labels);
  return model;
}

Tensor hoda_transform(const HodaModel& model, const Tensor& t) {
  if (t.dims() != model.input_dims) throw std::invalid_argument("hoda_transform: input shape mismatch");
  return multi_mode_product_transposed(t, model.projections);
}

double fisher_ratio(std::span<const Tensor> latents, std::span<const int> labels) {
  const ClassStats stats = class_statistics(latents, labels);
  if (stats.class_count < 2) throw std::invalid_argument("fisher_ratio: need at least two classes");
  double between = 0.0;
  for (std::size_t c = 0; c < stats.class_count; ++c) {
    between += static_cast<double>(stats.counts[c]) * squared_norm(stats.class_means[c] - stats.grand_mean);
  }
  double within = 0.0;
  for (std::size_t n = 0; n < latents.size(); ++n) {
    within += squared_norm(latents[n] - stats.class_means[static_cast<std::size_t>(labels[n])]);
  }
  if (within == 0.0) {
    if (between == 0.0) throw std::domain_error("fisher_ratio: undefined (0/0) for identical samples");
    return std::numeric_limits<double>::infinity();
  }
  return between / within;
}

}  // namespace tdk

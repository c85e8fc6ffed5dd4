#include "tdk/discriminant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tdk/dataset.hpp"

namespace tdk {

const Dims& LabeledDataset::dims() const {
  if (samples.empty()) throw std::invalid_argument("dataset is empty");
  return samples.front().dims();
}

std::size_t class_count_of(std::span<const int> labels) {
  int top = -1;
  for (int c : labels) {
    if (c < 0) throw std::invalid_argument("class labels must be nonnegative");
    top = std::max(top, c);
  }
  return static_cast<std::size_t>(top + 1);
}

std::size_t LabeledDataset::class_count() const { return class_count_of(labels); }

void LabeledDataset::validate() const {
  if (samples.empty()) throw std::invalid_argument("dataset is empty");
  if (samples.size() != labels.size()) {
    throw std::invalid_argument("dataset has " + std::to_string(samples.size()) + " samples but " +
                                std::to_string(labels.size()) + " labels");
  }
  for (const Tensor& t : samples) {
    if (t.dims() != samples.front().dims()) throw std::invalid_argument("dataset samples differ in shape");
  }
  std::vector<std::size_t> counts(class_count(), 0);
  for (int c : labels) ++counts[static_cast<std::size_t>(c)];
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw std::invalid_argument("class " + std::to_string(c) + " has no samples");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.samples.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.samples.push_back(samples.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

ClassStats class_statistics(std::span<const Tensor> samples, std::span<const int> labels) {
  if (samples.empty()) throw std::invalid_argument("class_statistics: empty dataset");
  if (samples.size() != labels.size()) throw std::invalid_argument("class_statistics: label count mismatch");
  if (samples.size() < 2) throw std::invalid_argument("class_statistics: need at least two samples");

  ClassStats stats;
  stats.class_count = class_count_of(labels);
  stats.counts.assign(stats.class_count, 0);
  stats.class_means.assign(stats.class_count, Tensor(samples.front().dims()));
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto c = static_cast<std::size_t>(labels[n]);
    stats.class_means[c] += samples[n];
    ++stats.counts[c];
  }
  stats.grand_mean = Tensor(samples.front().dims());
  for (std::size_t c = 0; c < stats.class_count; ++c) {
    if (stats.counts[c] == 0) {
      throw std::invalid_argument("class_statistics: class " + std::to_string(c) + " is empty");
    }
    stats.class_means[c] *= 1.0 / static_cast<double>(stats.counts[c]);
    stats.grand_mean += stats.class_means[c];
  }
  stats.grand_mean *= 1.0 / static_cast<double>(stats.class_count);
  return stats;
}

ScatterPair partial_scatters(std::span<const Tensor> partials, std::span<const int> labels,
                             const ClassStats& stats, std::size_t mode) {
  if (partials.empty()) throw std::invalid_argument("partial_scatters: no samples");
  if (partials.size() != labels.size()) throw std::invalid_argument("partial_scatters: label count mismatch");
  const Dims& dims = partials.front().dims();
  if (mode >= dims.size()) throw std::out_of_range("partial_scatters: mode out of range");
  if (stats.grand_mean.dims() != dims) throw std::invalid_argument("partial_scatters: stats shape mismatch");

  const auto d = static_cast<Eigen::Index>(dims[mode]);
  ScatterPair out{Matrix::Zero(d, d), Matrix::Zero(d, d)};
  for (std::size_t n = 0; n < partials.size(); ++n) {
    if (partials[n].dims() != dims) throw std::invalid_argument("partial_scatters: samples differ in shape");
    const auto c = static_cast<std::size_t>(labels[n]);
    accumulate_mode_gram(partials[n] - stats.class_means.at(c), mode, out.within);
  }
  for (std::size_t c = 0; c < stats.class_count; ++c) {
    accumulate_mode_gram(stats.class_means[c] - stats.grand_mean, mode, out.between,
                         static_cast<double>(stats.counts[c]));
  }
  return out;
}

Matrix total_scatter(std::span<const Tensor> samples, std::size_t mode) {
  if (samples.empty()) throw std::invalid_argument("total_scatter: no samples");
  const Dims& dims = samples.front().dims();
  if (mode >= dims.size()) throw std::out_of_range("total_scatter: mode out of range");
  const auto d = static_cast<Eigen::Index>(dims[mode]);
  Matrix s = Matrix::Zero(d, d);
  for (const Tensor& t : samples) {
    if (t.dims() != dims) throw std::invalid_argument("total_scatter: samples differ in shape");
    accumulate_mode_gram(t, mode, s);
  }
  return s;
}

Matrix shrink_scatter(const Matrix& scatter, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("shrinkage alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (scatter.rows() != scatter.cols()) throw std::invalid_argument("shrink_scatter: matrix not square");
  const double scale = scatter.trace() / static_cast<double>(scatter.rows());
  Matrix out = (1.0 - alpha) * scatter;
  out.diagonal().array() += alpha * scale;
  return out;
}

double ledoit_wolf_from_moments(const Matrix& outer_sum, std::size_t count, double sum_norm4) {
  if (count == 0) return 0.0;
  const auto p = outer_sum.rows();
  const double n = static_cast<double>(count);
  const Matrix cov = outer_sum / n;
  const double mu = cov.trace() / static_cast<double>(p);
  Matrix centered_target = cov;
  centered_target.diagonal().array() -= mu;
  const double delta = centered_target.squaredNorm();
  if (delta <= 0.0) return 0.0;
  // sum_m ||x_m x_mᵀ - cov||² = sum_m ||x_m||⁴ - n ||cov||²
  const double beta = std::max(0.0, (sum_norm4 - n * cov.squaredNorm()) / (n * n));
  return std::min(beta, delta) / delta;
}

double ledoit_wolf_shrinkage(const Matrix& centered_rows) {
  const Matrix outer = centered_rows.transpose() * centered_rows;
  const double norm4 = centered_rows.rowwise().squaredNorm().array().square().sum();
  return ledoit_wolf_from_moments(outer, static_cast<std::size_t>(centered_rows.rows()), norm4);
}

double ledoit_wolf_shrinkage(std::span<const Tensor> centered, std::size_t mode) {
  if (centered.empty()) return 0.0;
  const auto d = static_cast<Eigen::Index>(centered.front().dim(mode));
  Matrix outer = Matrix::Zero(d, d);
  double norm4 = 0.0;
  std::size_t fibers = 0;
  for (const Tensor& t : centered) {
    const Matrix u = unfold(t, mode);
    outer.noalias() += u * u.transpose();
    norm4 += u.colwise().squaredNorm().array().square().sum();
    fibers += static_cast<std::size_t>(u.cols());
  }
  return ledoit_wolf_from_moments(outer, fibers, norm4);
}

EigenResult leading_eigenvectors(const Matrix& symmetric, std::size_t count, EigenOrder order) {
  const auto p = symmetric.rows();
  if (p != symmetric.cols() || p == 0) throw std::invalid_argument("leading_eigenvectors: matrix not square");
  if (count < 1 || count > static_cast<std::size_t>(p)) {
    throw std::invalid_argument("leading_eigenvectors: requested " + std::to_string(count) +
                                " eigenvectors of a " + std::to_string(p) + "x" + std::to_string(p) +
                                " matrix");
  }
  const double scale = symmetric.cwiseAbs().maxCoeff();
  const double asym = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) throw std::invalid_argument("leading_eigenvectors: matrix is not symmetric");
  const Matrix sym = 0.5 * (symmetric + symmetric.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("leading_eigenvectors: eigensolver failed");
  const Vector& values = solver.eigenvalues();

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (order == EigenOrder::Magnitude) {
      const double ma = std::abs(values[a]);
      const double mb = std::abs(values[b]);
      if (ma != mb) return ma > mb;
    }
    return values[a] > values[b];
  });

  EigenResult out;
  out.values.resize(static_cast<Eigen::Index>(count));
  out.vectors.resize(p, static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const auto src = idx[j];
    const auto dst = static_cast<Eigen::Index>(j);
    out.values[dst] = values[src];
    Vector v = solver.eigenvectors().col(src);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < p; ++i) {
      if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
    }
    if (v[pivot] < 0.0) v = -v;
    out.vectors.col(dst) = v;
  }
  return out;
}

}  // namespace tdk

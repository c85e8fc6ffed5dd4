#include "tdk/feature_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tdk/dataset.hpp"

namespace tdk {
namespace {

constexpr double kRelativeVarianceFloor = 1e-12;

void check_rows(const Matrix& features, std::span<const int> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("feature rows (" + std::to_string(features.rows()) +
                                ") do not match label count (" + std::to_string(labels.size()) + ")");
  }
}

struct ColumnClassMeans {
  Matrix means;  // C x F
  std::vector<std::size_t> counts;
};

ColumnClassMeans column_class_means(const Matrix& features, std::span<const int> labels) {
  const std::size_t classes = class_count_of(labels);
  ColumnClassMeans out{Matrix::Zero(static_cast<Eigen::Index>(classes), features.cols()),
                       std::vector<std::size_t>(classes, 0)};
  for (Eigen::Index n = 0; n < features.rows(); ++n) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(n)]);
    out.means.row(static_cast<Eigen::Index>(c)) += features.row(n);
    ++out.counts[c];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (out.counts[c] == 0) throw std::invalid_argument("class " + std::to_string(c) + " has no samples");
    out.means.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(out.counts[c]);
  }
  return out;
}

}  // namespace

Matrix Whitener::apply(const Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != input_width()) {
    throw std::invalid_argument("whitener expects " + std::to_string(input_width()) + " features, got " +
                                std::to_string(features.cols()));
  }
  return (features.rowwise() - mean.transpose()) * transform.transpose();
}

Whitener fit_whitening_pca(const Matrix& features) {
  if (features.rows() < 2) throw std::invalid_argument("fit_whitening_pca: need at least two samples");
  const auto width = features.cols();
  Whitener w;
  w.mean = features.colwise().mean().transpose();
  const Matrix centered = features.rowwise() - w.mean.transpose();
  const Matrix covariance = (centered.transpose() * centered) / static_cast<double>(features.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  if (eig.info() != Eigen::Success) throw std::runtime_error("fit_whitening_pca: eigensolver failed");
  w.variances = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double largest = w.variances.size() > 0 ? w.variances[0] : 0.0;

  w.transform = Matrix::Zero(width, width);
  w.active.assign(static_cast<std::size_t>(width), false);
  for (Eigen::Index i = 0; i < width; ++i) {
    const double var = w.variances[i];
    if (!(var > 0.0) || var < kRelativeVarianceFloor * largest) continue;
    Vector v = vectors.col(i);
    Eigen::Index pivot = 0;
    for (Eigen::Index j = 1; j < width; ++j) {
      if (std::abs(v[j]) > std::abs(v[pivot])) pivot = j;
    }
    if (v[pivot] < 0.0) v = -v;
    w.transform.row(i) = v.transpose() / std::sqrt(var);
    w.active[static_cast<std::size_t>(i)] = true;
  }
  return w;
}

Vector fisher_scores(const Matrix& features, std::span<const int> labels) {
  check_rows(features, labels);
  const ColumnClassMeans cm = column_class_means(features, labels);
  if (cm.counts.size() < 2) throw std::invalid_argument("fisher_scores: need at least two classes");
  const Vector grand = cm.means.colwise().mean().transpose();

  Vector between = Vector::Zero(features.cols());
  for (std::size_t c = 0; c < cm.counts.size(); ++c) {
    const Vector diff = cm.means.row(static_cast<Eigen::Index>(c)).transpose() - grand;
    between += static_cast<double>(cm.counts[c]) * diff.cwiseProduct(diff);
  }
  Vector within = Vector::Zero(features.cols());
  for (Eigen::Index n = 0; n < features.rows(); ++n) {
    const auto c = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(n)]);
    within += (features.row(n) - cm.means.row(c)).cwiseAbs2().transpose();
  }

  Vector scores(features.cols());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (within[i] == 0.0) {
      scores[i] = between[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      scores[i] = between[i] / within[i];
    }
  }
  return scores;
}

std::size_t FeatureMask::kept() const {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
}

Matrix FeatureMask::apply(const Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != keep.size()) {
    throw std::invalid_argument("feature mask width mismatch");
  }
  Matrix out(features.rows(), static_cast<Eigen::Index>(kept()));
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.col(col++) = features.col(static_cast<Eigen::Index>(i));
  }
  return out;
}

FeatureMask select_discriminant(const Vector& scores, const std::vector<bool>& eligible) {
  if (scores.size() == 0) throw std::invalid_argument("select_discriminant: no scores");
  const auto width = static_cast<std::size_t>(scores.size());
  if (!eligible.empty() && eligible.size() != width) {
    throw std::invalid_argument("select_discriminant: eligibility mask width mismatch");
  }
  const bool any_eligible = eligible.empty() || std::find(eligible.begin(), eligible.end(), true) != eligible.end();
  auto is_eligible = [&](std::size_t i) { return !any_eligible || eligible.empty() || eligible[i]; };

  FeatureMask mask{std::vector<bool>(width, false), scores};
  bool any = false;
  for (std::size_t i = 0; i < width; ++i) {
    if (is_eligible(i) && scores[static_cast<Eigen::Index>(i)] > 1.0) {
      mask.keep[i] = true;
      any = true;
    }
  }
  if (!any) {
    std::size_t best = width;
    for (std::size_t i = 0; i < width; ++i) {
      if (!is_eligible(i)) continue;
      if (best == width || scores[static_cast<Eigen::Index>(i)] > scores[static_cast<Eigen::Index>(best)]) best = i;
    }
    mask.keep[best] = true;
  }
  return mask;
}

LdaClassifier fit_lda(const Matrix& features, std::span<const int> labels, Shrinkage shrinkage) {
  check_rows(features, labels);
  if (features.cols() < 1) throw std::invalid_argument("fit_lda: no features");
  const ColumnClassMeans cm = column_class_means(features, labels);
  const std::size_t classes = cm.counts.size();
  if (classes < 2) throw std::invalid_argument("fit_lda: need at least two classes");
  const auto n = static_cast<double>(features.rows());
  LdaClassifier clf;
  clf.means = cm.means;
  clf.log_priors.resize(static_cast<Eigen::Index>(classes));
  for (std::size_t c = 0; c < classes; ++c) {
    clf.log_priors[static_cast<Eigen::Index>(c)] = std::log(static_cast<double>(cm.counts[c]) / n);
  }

  Matrix centered = features;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    centered.row(i) -= cm.means.row(labels[static_cast<std::size_t>(i)]);
  }
  const Matrix pooled = (centered.transpose() * centered) / n;

  switch (shrinkage.kind) {
    case Shrinkage::Kind::Off:
      clf.shrinkage = 0.0;
      break;
    case Shrinkage::Kind::Fixed:
      clf.shrinkage = shrinkage.alpha;
      break;
    case Shrinkage::Kind::Auto:
      clf.shrinkage = ledoit_wolf_shrinkage(centered);
      break;
  }
  clf.covariance = shrink_scatter(pooled, clf.shrinkage);

  // Guarantee positive definiteness when the shrunk covariance is still singular.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(clf.covariance, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(smallest > 1e-12 * largest)) {
    const double ridge = largest > 0.0 ? 1e-10 * largest : 1e-12;
    clf.covariance.diagonal().array() += ridge;
  }

  Eigen::LDLT<Matrix> ldlt(clf.covariance);
  clf.coefficients = ldlt.solve(cm.means.transpose());
  clf.intercepts.resize(static_cast<Eigen::Index>(classes));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(classes); ++c) {
    clf.intercepts[c] = -0.5 * cm.means.row(c).dot(clf.coefficients.col(c)) + clf.log_priors[c];
  }
  return clf;
}

Matrix lda_scores(const LdaClassifier& clf, const Matrix& features) {
  if (static_cast<std::size_t>(features.cols()) != clf.width()) {
    throw std::invalid_argument("lda_scores: classifier expects " + std::to_string(clf.width()) +
                                " features, got " + std::to_string(features.cols()));
  }
  Matrix scores = features * clf.coefficients;
  scores.rowwise() += clf.intercepts.transpose();
  return scores;
}

Vector binary_scores(const Matrix& scores) {
  if (scores.cols() != 2) throw std::invalid_argument("binary_scores: need exactly two classes");
  return scores.col(1) - scores.col(0);
}

std::vector<int> predict_labels(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Tensor class_contrast(const BttdaModel& model, std::span<const ClassStats> block_stats, std::size_t block,
                      int c2, int c1) {
  if (block >= model.blocks.size() || block >= block_stats.size()) {
    throw std::out_of_range("class_contrast: block " + std::to_string(block) + " does not exist");
  }
  const ClassStats& stats = block_stats[block];
  auto check = [&](int c) {
    if (c < 0 || static_cast<std::size_t>(c) >= stats.class_count) {
      throw std::out_of_range("class_contrast: unknown class " + std::to_string(c));
    }
  };
  check(c2);
  check(c1);
  const Tensor diff = stats.class_means[static_cast<std::size_t>(c2)] - stats.class_means[static_cast<std::size_t>(c1)];
  return reconstruct(diff, model.blocks[block].forward.patterns);
}

FeatureHead fit_feature_head(const Matrix& features, std::span<const int> labels, Shrinkage lda_shrinkage) {
  check_rows(features, labels);
  FeatureHead head;
  head.whitener = fit_whitening_pca(features);
  const Matrix white = head.whitener.apply(features);
  head.mask = select_discriminant(fisher_scores(white, labels), head.whitener.active);
  head.lda = fit_lda(head.mask.apply(white), labels, lda_shrinkage);
  return head;
}

Matrix head_scores(const FeatureHead& head, const Matrix& features) {
  return lda_scores(head.lda, head.mask.apply(head.whitener.apply(features)));
}

Decoder fit_decoder(const LabeledDataset& data, const DecoderConfig& config) {
  BttdaFit fit = fit_bttda(data, config.blocks, config.theta, config.fit);
  Decoder decoder;
  decoder.head = fit_feature_head(fit.features, data.labels, config.lda_shrinkage);
  decoder.bttda = std::move(fit.model);
  return decoder;
}

Matrix decoder_scores(const Decoder& decoder, std::span<const Tensor> samples) {
  return head_scores(decoder.head, bttda_transform(decoder.bttda, samples));
}

}  // namespace tdk

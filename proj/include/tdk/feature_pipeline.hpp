#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdk/bttda.hpp"
#include "tdk/discriminant.hpp"
#include "tdk/tensor.hpp"

namespace tdk {

/// PCA whitening keeping every principal component. Components whose variance
/// is below 1e-12 of the largest are mapped to zero instead of amplified.
struct Whitener {
  Vector mean;
  Matrix transform;  // row i = scale_i · v_iᵀ
  Vector variances;  // descending
  std::vector<bool> active;

  std::size_t input_width() const { return static_cast<std::size_t>(mean.size()); }
  /// Rows are samples.
  Matrix apply(const Matrix& features) const;
};

Whitener fit_whitening_pca(const Matrix& features);

/// Univariate Fisher score per column: Σ_c N_c (ḡ_c - ḡ̄)² / Σ_n (g_n - ḡ_{c_n})²,
/// with ḡ̄ the mean of the class means. 0/0 scores 0; x/0 scores +infinity.
Vector fisher_scores(const Matrix& features, std::span<const int> labels);

struct FeatureMask {
  std::vector<bool> keep;
  Vector scores;

  std::size_t kept() const;
  Matrix apply(const Matrix& features) const;
};

/// Keeps components with score > 1; if there are none, keeps the single best
/// (lowest index on ties). Components flagged ineligible are never kept unless
/// nothing is eligible.
FeatureMask select_discriminant(const Vector& scores, const std::vector<bool>& eligible = {});

/// Linear discriminant with a pooled, shrinkage-regularized covariance.
struct LdaClassifier {
  Matrix means;       // C x F
  Matrix covariance;  // F x F, symmetric positive definite
  Vector log_priors;
  double shrinkage = 0.0;
  Matrix coefficients;  // F x C
  Vector intercepts;

  std::size_t class_count() const { return static_cast<std::size_t>(means.rows()); }
  std::size_t width() const { return static_cast<std::size_t>(means.cols()); }
};

LdaClassifier fit_lda(const Matrix& features, std::span<const int> labels,
                      Shrinkage shrinkage = Shrinkage::automatic());

/// N x C discriminant scores.
Matrix lda_scores(const LdaClassifier& clf, const Matrix& features);

/// Class-1 minus class-0 discriminant; requires two columns.
Vector binary_scores(const Matrix& scores);

std::vector<int> predict_labels(const Matrix& scores);

/// (Ḡ_{c2} - Ḡ_{c1}) for block `block` (0-based) expanded through that block's
/// activation patterns. `block_stats` comes from block_latent_statistics.
Tensor class_contrast(const BttdaModel& model, std::span<const ClassStats> block_stats, std::size_t block,
                      int c2, int c1);

/// Whitening, Fisher-score selection and LDA fitted on one feature matrix.
struct FeatureHead {
  Whitener whitener;
  FeatureMask mask;
  LdaClassifier lda;
};

FeatureHead fit_feature_head(const Matrix& features, std::span<const int> labels,
                             Shrinkage lda_shrinkage = Shrinkage::automatic());
Matrix head_scores(const FeatureHead& head, const Matrix& features);

struct DecoderConfig {
  double theta = 0.0;
  std::size_t blocks = 1;
  FitOptions fit;
  Shrinkage lda_shrinkage = Shrinkage::automatic();
};

/// BTTDA feature extraction followed by the feature head.
struct Decoder {
  BttdaModel bttda;
  FeatureHead head;
};

Decoder fit_decoder(const LabeledDataset& data, const DecoderConfig& config);
Matrix decoder_scores(const Decoder& decoder, std::span<const Tensor> samples);

}  // namespace tdk

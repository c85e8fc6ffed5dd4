#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdk/tensor.hpp"

namespace tdk {

/// Per-class counts and means. The grand mean is the unweighted mean of the
/// class means, not the sample mean.
struct ClassStats {
  std::size_t class_count = 0;
  std::vector<std::size_t> counts;
  std::vector<Tensor> class_means;
  Tensor grand_mean;
};

ClassStats class_statistics(std::span<const Tensor> samples, std::span<const int> labels);

struct ScatterPair {
  Matrix within;
  Matrix between;
};

/// Within- and between-class scatter of the mode-`mode` unfoldings of
/// `partials`. `stats` must describe the same tensors.
ScatterPair partial_scatters(std::span<const Tensor> partials, std::span<const int> labels,
                             const ClassStats& stats, std::size_t mode);

/// Sum over samples of X_k(n) X_k(n)ᵀ (uncentered).
Matrix total_scatter(std::span<const Tensor> samples, std::size_t mode);

struct Shrinkage {
  enum class Kind { Off, Fixed, Auto };
  Kind kind = Kind::Off;
  double alpha = 0.0;

  static Shrinkage off() { return {}; }
  static Shrinkage fixed(double alpha) { return {Kind::Fixed, alpha}; }
  static Shrinkage automatic() { return {Kind::Auto, 0.0}; }
};

/// (1 - alpha) S + alpha (tr(S) / p) I.
Matrix shrink_scatter(const Matrix& scatter, double alpha);

/// Ledoit-Wolf intensity toward the scaled identity, given the sum of outer
/// products of `count` centered observations and the sum of their fourth
/// powers (squared squared-norms). Result is in [0, 1].
double ledoit_wolf_from_moments(const Matrix& outer_sum, std::size_t count, double sum_norm4);

/// Ledoit-Wolf intensity for observations stored as rows (already centered).
double ledoit_wolf_shrinkage(const Matrix& centered_rows);

/// Ledoit-Wolf intensity over the mode-`mode` fibers of centered tensors.
double ledoit_wolf_shrinkage(std::span<const Tensor> centered, std::size_t mode);

enum class EigenOrder {
  Magnitude,  // |λ| descending, then λ descending
  Algebraic,  // λ descending
};

struct EigenResult {
  Vector values;
  Matrix vectors;  // one eigenvector per column
};

/// Leading `count` eigenpairs of a symmetric matrix. Each column is flipped so
/// its largest-magnitude entry is positive (lowest index wins ties). Inputs
/// asymmetric beyond 1e-9 relative are rejected; smaller asymmetry is averaged
/// away.
EigenResult leading_eigenvectors(const Matrix& symmetric, std::size_t count,
                                 EigenOrder order = EigenOrder::Magnitude);

}  // namespace tdk

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tdk/dataset.hpp"
#include "tdk/tensor.hpp"

namespace tdk {

/// A rank-1 class effect: per-mode unit vectors and one amplitude per class.
struct Effect {
  std::vector<Vector> factors;
  std::vector<double> amplitudes;
};

/// Samples are Σ_e amplitude_e[c] · (f_e0 ∘ f_e1 ∘ ...) + σ · Z ×_0 L_0 ×_1 L_1 ...,
/// with Z standard normal, so the noise covariance is σ² (L_K L_Kᵀ ⊗ ... ⊗ L_0 L_0ᵀ).
struct SyntheticConfig {
  Dims dims;
  std::size_t per_class = 0;
  std::size_t classes = 2;
  std::vector<Effect> effects;
  double sigma = 1.0;
  /// Square roots of the per-mode noise covariances; empty means identity.
  std::vector<Matrix> noise_roots;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Samples are interleaved by class: sample n has label n mod C.
LabeledDataset generate_synthetic(const SyntheticConfig& config);

/// Smooth nonnegative unit vector supported on [begin, end) of a length-`dim` axis.
Vector bump_vector(std::size_t dim, std::size_t begin, std::size_t end);

/// `effects` rank-1 effects present in class 1 only, each on its own disjoint
/// slice of every mode, so the effects are mutually orthogonal in every mode.
SyntheticConfig planted_config(const Dims& dims, std::size_t per_class, std::size_t effects, double amplitude,
                               double sigma, std::uint64_t seed);

}  // namespace tdk

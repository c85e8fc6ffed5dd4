#pragma once

#include <span>
#include <vector>

#include "tdk/hoda.hpp"
#include "tdk/tensor.hpp"

namespace tdk {

/// Activation patterns A_k (D_k x R_k) that expand latent tensors back to data
/// space: X̂ = G ×_1 A_1 ×_2 ... ×_K A_K.
struct ActivationSet {
  std::vector<Matrix> patterns;
  int iterations = 0;
  bool converged = false;
  std::vector<double> update_norms;
  /// Relative normal-equation residual per mode at exit.
  std::vector<double> residuals;
  /// Summed squared reconstruction error after each sweep.
  std::vector<double> error_history;
  /// Modes whose last solve needed the ridge fallback.
  std::vector<bool> ridge_used;
};

/// Alternating least squares for the activation patterns, starting from
/// `init` (normally the backward projections). Halts after
/// `opts.max_iterations` sweeps, or once every pattern moved less than
/// `opts.tolerance` in a sweep and every mode's relative normal-equation
/// residual is at most 1e-8.
ActivationSet fit_hoda_forward(std::span<const Tensor> latents, std::span<const Tensor> originals,
                               std::vector<Matrix> init, const FitOptions& opts = {});

Tensor reconstruct(const Tensor& latent, std::span<const Matrix> patterns);
std::vector<Tensor> reconstruct(std::span<const Tensor> latents, const ActivationSet& activations);

/// Per mode, ‖C - A_k M‖_F / max(‖C‖_F, ‖A_k M‖_F) with C = Σ X_k Ĝ_kᵀ and
/// M = Σ Ĝ_k Ĝ_kᵀ over samples, where Ĝ is the latent expanded in every other mode.
std::vector<double> normal_equation_residuals(std::span<const Tensor> latents,
                                              std::span<const Tensor> originals,
                                              std::span<const Matrix> patterns);

}  // namespace tdk

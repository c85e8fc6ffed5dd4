#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "tdk/dataset.hpp"
#include "tdk/discriminant.hpp"
#include "tdk/tensor.hpp"

namespace tdk {

enum class InitStrategy {
  PartialHosvd,  // leading eigenvectors of each mode's total scatter
  SeededRandom,  // orthonormalized Gaussian matrices from the seed
};

struct FitOptions {
  int max_iterations = 128;
  double tolerance = 1e-6;
  InitStrategy init = InitStrategy::PartialHosvd;
  std::uint64_t seed = 0;
  /// Shrinkage of the partial within-class scatter.
  Shrinkage shrinkage = Shrinkage::off();
  /// Eigenpair ordering for S_b - φ S_w. Algebraic keeps the directions along
  /// which between-class scatter dominates; Magnitude also admits strongly
  /// negative eigenvalues.
  EigenOrder discriminant_order = EigenOrder::Algebraic;

  void validate() const;
};

/// Raised when the within-class scatter of the projected data vanishes and no
/// shrinkage is available to regularize it.
class SingularFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HodaDiagnostics {
  int iterations = 0;
  std::vector<double> update_norms;  // projector distance per mode, last sweep
  double initial_fisher_ratio = 0.0;
  double final_fisher_ratio = 0.0;
  bool converged = false;
};

/// Per-mode orthonormal projections U_k (D_k x R_k). Data maps to latents by
/// contracting each mode with U_kᵀ.
struct HodaModel {
  Dims input_dims;
  std::vector<std::size_t> ranks;
  std::vector<Matrix> projections;
  HodaDiagnostics diagnostics;

  Dims latent_dims() const { return ranks; }
};

std::vector<Matrix> init_projections(const LabeledDataset& data, std::span<const std::size_t> ranks,
                                     InitStrategy strategy, std::uint64_t seed = 0);

HodaModel fit_hoda_backward(const LabeledDataset& data, std::span<const std::size_t> ranks,
                            const FitOptions& opts = {});

Tensor hoda_transform(const HodaModel& model, const Tensor& t);

/// Between-class over within-class scatter of latent tensors, with the grand
/// mean taken as the unweighted mean of class means. Returns +infinity when only
/// the denominator vanishes; throws std::domain_error when both do.
double fisher_ratio(std::span<const Tensor> latents, std::span<const int> labels);

}  // namespace tdk

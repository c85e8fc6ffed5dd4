#include "tdk/forward_model.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace tdk {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kRidgeFactor = 1e-10;
// Exit requirement on the relative normal-equation residual of every mode.
constexpr double kResidualBound = 1e-8;

struct NormalEquations {
  Matrix gram;   // R_k x R_k
  Matrix cross;  // D_k x R_k
};

NormalEquations assemble(std::span<const Tensor> latents, std::span<const Tensor> originals,
                         std::span<const Matrix> patterns, std::size_t mode) {
  const auto rank = patterns[mode].cols();
  const auto dim = patterns[mode].rows();
  NormalEquations eq{Matrix::Zero(rank, rank), Matrix::Zero(dim, rank)};
  for (std::size_t n = 0; n < latents.size(); ++n) {
    const Tensor expanded = multi_mode_product(latents[n], patterns, mode);
    accumulate_mode_gram(expanded, mode, eq.gram);
    eq.cross += mode_cross_gram(originals[n], expanded, mode);
  }
  return eq;
}

double relative_residual(const NormalEquations& eq, const Matrix& pattern) {
  const double scale = std::max(eq.cross.norm(), (pattern * eq.gram).norm());
  if (scale == 0.0) return 0.0;
  return (eq.cross - pattern * eq.gram).norm() / scale;
}

// Minimizes sum ‖X_k - A Ĝ_k‖² over A: A = cross · gram⁻¹, with a ridge when the
// Gram matrix is ill conditioned and the zero (minimum-norm) solution when it
// vanishes.
Matrix solve_pattern(const NormalEquations& eq, bool& ridge_used) {
  ridge_used = false;
  const auto rank = eq.gram.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(eq.gram, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(largest > 0.0)) return Matrix::Zero(eq.cross.rows(), rank);

  Matrix system = eq.gram;
  if (!(smallest > 0.0) || largest / smallest > kMaxCondition) {
    ridge_used = true;
    system.diagonal().array() += kRidgeFactor * eq.gram.trace() / static_cast<double>(rank);
  }
  Eigen::LDLT<Matrix> ldlt(system);
  return ldlt.solve(eq.cross.transpose()).transpose();
}

double squared_error_from(const NormalEquations& eq, const Matrix& pattern, double data_energy) {
  // Σ‖X - A Ĝ‖² = Σ‖X‖² - 2 tr(Aᵀ cross) + tr(Aᵀ A gram)
  const double value = data_energy - 2.0 * (pattern.transpose() * eq.cross).trace() +
                       (pattern.transpose() * pattern * eq.gram).trace();
  return std::max(0.0, value);
}

}  // namespace

ActivationSet fit_hoda_forward(std::span<const Tensor> latents, std::span<const Tensor> originals,
                               std::vector<Matrix> init, const FitOptions& opts) {
  opts.validate();
  if (latents.empty()) throw std::invalid_argument("fit_hoda_forward: no samples");
  if (latents.size() != originals.size()) throw std::invalid_argument("fit_hoda_forward: latents and originals differ in count");
  const Dims& rank_dims = latents.front().dims();
  const Dims& data_dims = originals.front().dims();
  const std::size_t order = data_dims.size();
  if (rank_dims.size() != order || init.size() != order) {
    throw std::invalid_argument("fit_hoda_forward: order mismatch");
  }
  for (std::size_t k = 0; k < order; ++k) {
    if (static_cast<std::size_t>(init[k].rows()) != data_dims[k] ||
        static_cast<std::size_t>(init[k].cols()) != rank_dims[k]) {
      throw std::invalid_argument("fit_hoda_forward: initial pattern for mode " + std::to_string(k) +
                                  " has the wrong shape");
    }
  }
  double data_energy = 0.0;
  for (std::size_t n = 0; n < latents.size(); ++n) {
    if (latents[n].dims() != rank_dims || originals[n].dims() != data_dims) {
      throw std::invalid_argument("fit_hoda_forward: samples differ in shape");
    }
    data_energy += squared_norm(originals[n]);
  }

  ActivationSet out;
  out.patterns = std::move(init);
  out.update_norms.assign(order, 0.0);
  out.ridge_used.assign(order, false);

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    double sweep_error = 0.0;
    for (std::size_t k = 0; k < order; ++k) {
      const NormalEquations eq = assemble(latents, originals, out.patterns, k);
      bool ridge = false;
      Matrix next = solve_pattern(eq, ridge);
      out.ridge_used[k] = ridge;
      out.update_norms[k] = (next - out.patterns[k]).norm();
      out.patterns[k] = std::move(next);
      if (k + 1 == order) sweep_error = squared_error_from(eq, out.patterns[k], data_energy);
    }
    out.iterations = iter;
    out.error_history.push_back(sweep_error);
    bool settled = true;
    for (double d : out.update_norms) settled = settled && d < opts.tolerance;
    if (!settled) continue;
    // Small updates alone do not make every mode stationary: the modes solved
    // early in the sweep saw patterns that have since moved.
    out.residuals = normal_equation_residuals(latents, originals, out.patterns);
    if (*std::max_element(out.residuals.begin(), out.residuals.end()) <= kResidualBound) {
      out.converged = true;
      return out;
    }
  }

  out.residuals = normal_equation_residuals(latents, originals, out.patterns);
  return out;
}

Tensor reconstruct(const Tensor& latent, std::span<const Matrix> patterns) {
  for (std::size_t k = 0; k < patterns.size() && k < latent.order(); ++k) {
    if (static_cast<std::size_t>(patterns[k].cols()) != latent.dim(k)) {
      throw std::invalid_argument("reconstruct: pattern for mode " + std::to_string(k) +
                                  " does not match latent dimension");
    }
  }
  return multi_mode_product(latent, patterns);
}

std::vector<Tensor> reconstruct(std::span<const Tensor> latents, const ActivationSet& activations) {
  std::vector<Tensor> out;
  out.reserve(latents.size());
  for (const Tensor& g : latents) out.push_back(reconstruct(g, activations.patterns));
  return out;
}

std::vector<double> normal_equation_residuals(std::span<const Tensor> latents,
                                              std::span<const Tensor> originals,
                                              std::span<const Matrix> patterns) {
  std::vector<double> out;
  out.reserve(patterns.size());
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    out.push_back(relative_residual(assemble(latents, originals, patterns, k), patterns[k]));
  }
  return out;
}

}  // namespace tdk

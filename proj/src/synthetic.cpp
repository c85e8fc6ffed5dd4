#include "tdk/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tdk/rng.hpp"

namespace tdk {

void SyntheticConfig::validate() const {
  if (dims.empty()) throw std::invalid_argument("synthetic: dims must be nonempty");
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("synthetic: dimensions must be positive");
  }
  if (per_class == 0) throw std::invalid_argument("synthetic: per_class must be positive");
  if (classes < 1) throw std::invalid_argument("synthetic: need at least one class");
  if (!(sigma >= 0.0)) throw std::invalid_argument("synthetic: sigma must be nonnegative");
  for (const Effect& e : effects) {
    if (e.factors.size() != dims.size()) throw std::invalid_argument("synthetic: effect needs one factor per mode");
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (static_cast<std::size_t>(e.factors[k].size()) != dims[k]) {
        throw std::invalid_argument("synthetic: effect factor length mismatch in mode " + std::to_string(k));
      }
      if (std::abs(e.factors[k].norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("synthetic: effect factors must be unit vectors");
      }
    }
    if (e.amplitudes.size() != classes) throw std::invalid_argument("synthetic: need one amplitude per class");
  }
  if (!noise_roots.empty()) {
    if (noise_roots.size() != dims.size()) throw std::invalid_argument("synthetic: need one noise root per mode");
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const auto d = static_cast<Eigen::Index>(dims[k]);
      if (noise_roots[k].rows() != d || noise_roots[k].cols() != d) {
        throw std::invalid_argument("synthetic: noise root for mode " + std::to_string(k) + " has the wrong shape");
      }
    }
  }
}

LabeledDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::vector<Tensor> patterns;
  patterns.reserve(config.effects.size());
  for (const Effect& e : config.effects) patterns.push_back(outer_product(e.factors));

  CounterRng rng(config.seed, {0x5EED});
  LabeledDataset data;
  const std::size_t total = config.per_class * config.classes;
  data.samples.reserve(total);
  data.labels.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    const std::size_t c = n % config.classes;
    Tensor sample(config.dims);
    for (std::size_t e = 0; e < patterns.size(); ++e) {
      const double amp = config.effects[e].amplitudes[c];
      if (amp != 0.0) sample += amp * patterns[e];
    }
    if (config.sigma > 0.0) {
      Tensor noise(config.dims);
      for (double& v : noise.data()) v = rng.normal();
      if (!config.noise_roots.empty()) noise = multi_mode_product(noise, config.noise_roots);
      noise *= config.sigma;
      sample += noise;
    }
    data.samples.push_back(std::move(sample));
    data.labels.push_back(static_cast<int>(c));
  }
  return data;
}

Vector bump_vector(std::size_t dim, std::size_t begin, std::size_t end) {
  if (begin >= end || end > dim) throw std::invalid_argument("bump_vector: invalid support");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  const double width = static_cast<double>(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    v[static_cast<Eigen::Index>(i)] = std::sin(std::numbers::pi * (static_cast<double>(i - begin) + 0.5) / width);
  }
  return v / v.norm();
}

SyntheticConfig planted_config(const Dims& dims, std::size_t per_class, std::size_t effects, double amplitude,
                               double sigma, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.dims = dims;
  cfg.per_class = per_class;
  cfg.classes = 2;
  cfg.sigma = sigma;
  cfg.seed = seed;
  for (std::size_t e = 0; e < effects; ++e) {
    Effect effect;
    for (std::size_t d : dims) {
      if (d < effects) throw std::invalid_argument("planted_config: each mode needs at least one entry per effect");
      const std::size_t begin = e * d / effects;
      const std::size_t end = (e + 1) * d / effects;
      effect.factors.push_back(bump_vector(d, begin, end));
    }
    effect.amplitudes = {0.0, amplitude};
    cfg.effects.push_back(std::move(effect));
  }
  return cfg;
}

}  // namespace tdk

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdk/tensor.hpp"

namespace tdk {

/// N tensors of identical shape with 0-based integer class labels.
struct LabeledDataset {
  std::vector<Tensor> samples;
  std::vector<int> labels;

  std::size_t size() const { return samples.size(); }
  const Dims& dims() const;
  /// One more than the largest label.
  std::size_t class_count() const;

  /// Throws std::invalid_argument unless samples and labels align, shapes
  /// agree, labels are nonnegative and every class in [0, class_count) occurs.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

std::size_t class_count_of(std::span<const int> labels);

}  // namespace tdk

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tdk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

std::size_t element_count(const Dims& dims);

/// Dense K-way array of doubles.
///
/// Linearization: entry (i_1, ..., i_K) lives at offset
/// i_1 + D_1 * (i_2 + D_2 * (i_3 + ...)), i.e. the first mode varies fastest.
/// Modes are indexed from zero throughout the library.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Dims dims);
  Tensor(Dims dims, std::vector<double> data);

  std::size_t order() const { return dims_.size(); }
  const Dims& dims() const { return dims_; }
  std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  std::size_t offset(std::span<const std::size_t> index) const;
  double& operator()(std::span<const std::size_t> index) { return data_[offset(index)]; }
  double operator()(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  double& operator()(std::initializer_list<std::size_t> index) {
    return data_[offset({index.begin(), index.size()})];
  }
  double operator()(std::initializer_list<std::size_t> index) const {
    return data_[offset({index.begin(), index.size()})];
  }

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double factor);

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  Dims dims_;
  std::vector<double> data_;
};

Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator*(double factor, const Tensor& t);

/// Mode-k unfolding: D_k rows, one column per mode-k fiber. Columns are ordered
/// by the remaining modes ascending, lowest remaining mode fastest.
Matrix unfold(const Tensor& t, std::size_t mode);

/// Inverse of `unfold`.
Tensor fold(const Matrix& m, std::size_t mode, const Dims& dims);

/// t ×_mode m: contracts mode `mode` of t against the columns of m, so the
/// result has m.rows() in that mode.
Tensor mode_product(const Tensor& t, const Matrix& m, std::size_t mode);

/// Same as mode_product(t, m.transpose(), mode) without forming the transpose.
/// This is how orthonormal D_k x R_k projections are applied to data.
Tensor mode_product_transposed(const Tensor& t, const Matrix& m, std::size_t mode);

/// Applies one matrix per mode in ascending mode order, omitting `skip`.
Tensor multi_mode_product(const Tensor& t, std::span<const Matrix> mats,
                          std::optional<std::size_t> skip = std::nullopt);

/// Transposed counterpart of multi_mode_product: applies m_kᵀ to every mode.
Tensor multi_mode_product_transposed(const Tensor& t, std::span<const Matrix> mats,
                                     std::optional<std::size_t> skip = std::nullopt);

double squared_norm(const Tensor& t);
double frobenius_norm(const Tensor& t);

/// Flat copy in the tensor's linearization (mode 0 fastest).
Vector vectorize(const Tensor& t);
Tensor devectorize(const Vector& v, const Dims& dims);

/// unfold(a, mode) * unfold(b, mode)ᵀ without materializing either unfolding.
/// a and b must agree on every mode except `mode`.
Matrix mode_cross_gram(const Tensor& a, const Tensor& b, std::size_t mode);

/// acc += weight * unfold(t, mode) * unfold(t, mode)ᵀ
void accumulate_mode_gram(const Tensor& t, std::size_t mode, Matrix& acc, double weight = 1.0);

Matrix mode_gram(const Tensor& t, std::size_t mode);

/// Rank-1 tensor f_0 ∘ f_1 ∘ ... ∘ f_{K-1}.
Tensor outer_product(std::span<const Vector> factors);

}  // namespace tdk

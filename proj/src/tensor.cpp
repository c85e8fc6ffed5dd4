#include "tdk/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tdk/simd/kernels.hpp"

namespace tdk {
namespace {

void check_dims(const Dims& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor must have at least one mode");
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
  }
}

void check_mode(const Tensor& t, std::size_t mode) {
  if (mode >= t.order()) {
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order-" +
                            std::to_string(t.order()) + " tensor");
  }
}

void check_same_dims(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("tensor dimensions differ");
}

// Sizes of the modes before and after `mode`; the tensor is then viewed as a
// (left, D_mode, right) column-major array.
struct ModeSplit {
  std::size_t left = 1;
  std::size_t extent = 1;
  std::size_t right = 1;
};

ModeSplit split_at(const Dims& dims, std::size_t mode) {
  ModeSplit s;
  for (std::size_t j = 0; j < mode; ++j) s.left *= dims[j];
  s.extent = dims[mode];
  for (std::size_t j = mode + 1; j < dims.size(); ++j) s.right *= dims[j];
  return s;
}

// y(l, i, r) = sum_d coeff(i, d) * x(l, d, r)
template <typename Coeff>
void contract_mode(const double* x, double* y, const ModeSplit& s, std::size_t out_extent,
                   Coeff coeff) {
  const auto& k = simd::active_kernels();
  for (std::size_t r = 0; r < s.right; ++r) {
    const double* xr = x + r * s.extent * s.left;
    double* yr = y + r * out_extent * s.left;
    for (std::size_t i = 0; i < out_extent; ++i) {
      for (std::size_t d = 0; d < s.extent; ++d) {
        const double c = coeff(i, d);
        if (c != 0.0) k.axpy(c, xr + d * s.left, yr + i * s.left, s.left);
      }
    }
  }
}

}  // namespace

std::size_t element_count(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor() : dims_{1}, data_(1, 0.0) {}

Tensor::Tensor(Dims dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(element_count(dims_), 0.0);
}

Tensor::Tensor(Dims dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (data_.size() != element_count(dims_)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match product of dimensions " +
                                std::to_string(element_count(dims_)));
  }
}

std::size_t Tensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw std::invalid_argument("index has wrong number of modes");
  std::size_t off = 0;
  for (std::size_t j = dims_.size(); j-- > 0;) {
    if (index[j] >= dims_[j]) throw std::out_of_range("tensor index out of range");
    off = off * dims_[j] + index[j];
  }
  return off;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  check_same_dims(*this, other);
  simd::active_kernels().axpy(1.0, other.data_.data(), data_.data(), data_.size());
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  check_same_dims(*this, other);
  simd::active_kernels().axpy(-1.0, other.data_.data(), data_.data(), data_.size());
  return *this;
}

Tensor& Tensor::operator*=(double factor) {
  for (double& v : data_) v *= factor;
  return *this;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out -= b;
  return out;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out += b;
  return out;
}

Tensor operator*(double factor, const Tensor& t) {
  Tensor out = t;
  out *= factor;
  return out;
}

Matrix unfold(const Tensor& t, std::size_t mode) {
  check_mode(t, mode);
  const ModeSplit s = split_at(t.dims(), mode);
  Matrix m(s.extent, s.left * s.right);
  const double* x = t.data().data();
  for (std::size_t r = 0; r < s.right; ++r) {
    for (std::size_t d = 0; d < s.extent; ++d) {
      for (std::size_t l = 0; l < s.left; ++l) {
        m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(l + s.left * r)) =
            x[l + s.left * (d + s.extent * r)];
      }
    }
  }
  return m;
}

Tensor fold(const Matrix& m, std::size_t mode, const Dims& dims) {
  check_dims(dims);
  if (mode >= dims.size()) throw std::out_of_range("fold mode out of range");
  const ModeSplit s = split_at(dims, mode);
  if (static_cast<std::size_t>(m.rows()) != s.extent ||
      static_cast<std::size_t>(m.cols()) != s.left * s.right) {
    throw std::invalid_argument("matrix shape does not match fold dimensions");
  }
  Tensor t(dims);
  double* x = t.data().data();
  for (std::size_t r = 0; r < s.right; ++r) {
    for (std::size_t d = 0; d < s.extent; ++d) {
      for (std::size_t l = 0; l < s.left; ++l) {
        x[l + s.left * (d + s.extent * r)] =
            m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(l + s.left * r));
      }
    }
  }
  return t;
}

Tensor mode_product(const Tensor& t, const Matrix& m, std::size_t mode) {
  check_mode(t, mode);
  if (static_cast<std::size_t>(m.cols()) != t.dim(mode)) {
    throw std::invalid_argument("mode_product: matrix has " + std::to_string(m.cols()) +
                                " columns, mode " + std::to_string(mode) + " has dimension " +
                                std::to_string(t.dim(mode)));
  }
  Dims out_dims = t.dims();
  out_dims[mode] = static_cast<std::size_t>(m.rows());
  Tensor out(out_dims);
  const ModeSplit s = split_at(t.dims(), mode);
  const auto& k = simd::active_kernels();
  if (s.left == 1) {
    // Mode-0 fibers are contiguous: each output fiber is m times an input fiber.
    for (std::size_t r = 0; r < s.right; ++r) {
      const double* xr = t.data().data() + r * s.extent;
      double* yr = out.data().data() + r * out_dims[mode];
      for (std::size_t d = 0; d < s.extent; ++d) {
        if (xr[d] != 0.0) k.axpy(xr[d], m.col(static_cast<Eigen::Index>(d)).data(), yr, out_dims[mode]);
      }
    }
  } else {
    contract_mode(t.data().data(), out.data().data(), s, out_dims[mode],
                  [&](std::size_t i, std::size_t d) {
                    return m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
                  });
  }
  return out;
}

Tensor mode_product_transposed(const Tensor& t, const Matrix& m, std::size_t mode) {
  check_mode(t, mode);
  if (static_cast<std::size_t>(m.rows()) != t.dim(mode)) {
    throw std::invalid_argument("mode_product_transposed: matrix has " + std::to_string(m.rows()) +
                                " rows, mode " + std::to_string(mode) + " has dimension " +
                                std::to_string(t.dim(mode)));
  }
  Dims out_dims = t.dims();
  out_dims[mode] = static_cast<std::size_t>(m.cols());
  Tensor out(out_dims);
  const ModeSplit s = split_at(t.dims(), mode);
  const auto& k = simd::active_kernels();
  if (s.left == 1) {
    for (std::size_t r = 0; r < s.right; ++r) {
      const double* xr = t.data().data() + r * s.extent;
      double* yr = out.data().data() + r * out_dims[mode];
      for (std::size_t i = 0; i < out_dims[mode]; ++i) {
        yr[i] = k.dot(m.col(static_cast<Eigen::Index>(i)).data(), xr, s.extent);
      }
    }
  } else {
    contract_mode(t.data().data(), out.data().data(), s, out_dims[mode],
                  [&](std::size_t i, std::size_t d) {
                    return m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i));
                  });
  }
  return out;
}

namespace {

template <typename Apply>
Tensor multi_apply(const Tensor& t, std::span<const Matrix> mats, std::optional<std::size_t> skip,
                   Apply apply) {
  if (mats.size() != t.order()) {
    throw std::invalid_argument("multi_mode_product: expected " + std::to_string(t.order()) +
                                " matrices, got " + std::to_string(mats.size()));
  }
  if (skip && *skip >= t.order()) throw std::out_of_range("multi_mode_product: skip out of range");
  Tensor out = t;
  for (std::size_t mode = 0; mode < t.order(); ++mode) {
    if (skip && *skip == mode) continue;
    out = apply(out, mats[mode], mode);
  }
  return out;
}

}  // namespace

Tensor multi_mode_product(const Tensor& t, std::span<const Matrix> mats,
                          std::optional<std::size_t> skip) {
  return multi_apply(t, mats, skip, [](const Tensor& x, const Matrix& m, std::size_t mode) {
    return mode_product(x, m, mode);
  });
}

Tensor multi_mode_product_transposed(const Tensor& t, std::span<const Matrix> mats,
                                     std::optional<std::size_t> skip) {
  return multi_apply(t, mats, skip, [](const Tensor& x, const Matrix& m, std::size_t mode) {
    return mode_product_transposed(x, m, mode);
  });
}

double squared_norm(const Tensor& t) {
  return simd::active_kernels().sum_squares(t.data().data(), t.size());
}

double frobenius_norm(const Tensor& t) { return std::sqrt(squared_norm(t)); }

Vector vectorize(const Tensor& t) {
  return Eigen::Map<const Vector>(t.data().data(), static_cast<Eigen::Index>(t.size()));
}

Tensor devectorize(const Vector& v, const Dims& dims) {
  return Tensor(dims, std::vector<double>(v.data(), v.data() + v.size()));
}

Matrix mode_cross_gram(const Tensor& a, const Tensor& b, std::size_t mode) {
  check_mode(a, mode);
  if (a.order() != b.order()) throw std::invalid_argument("mode_cross_gram: order mismatch");
  for (std::size_t j = 0; j < a.order(); ++j) {
    if (j != mode && a.dim(j) != b.dim(j)) {
      throw std::invalid_argument("mode_cross_gram: tensors differ outside mode " +
                                  std::to_string(mode));
    }
  }
  const ModeSplit sa = split_at(a.dims(), mode);
  const ModeSplit sb = split_at(b.dims(), mode);
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(sa.extent), static_cast<Eigen::Index>(sb.extent));
  const auto& k = simd::active_kernels();
  const double* x = a.data().data();
  const double* y = b.data().data();
  if (sa.left == 1) {
    for (std::size_t r = 0; r < sa.right; ++r) {
      const double* xr = x + r * sa.extent;
      const double* yr = y + r * sb.extent;
      for (std::size_t j = 0; j < sb.extent; ++j) {
        if (yr[j] != 0.0) k.axpy(yr[j], xr, g.col(static_cast<Eigen::Index>(j)).data(), sa.extent);
      }
    }
  } else {
    for (std::size_t r = 0; r < sa.right; ++r) {
      const double* xr = x + r * sa.extent * sa.left;
      const double* yr = y + r * sb.extent * sb.left;
      for (std::size_t j = 0; j < sb.extent; ++j) {
        for (std::size_t i = 0; i < sa.extent; ++i) {
          g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
              k.dot(xr + i * sa.left, yr + j * sb.left, sa.left);
        }
      }
    }
  }
  return g;
}

void accumulate_mode_gram(const Tensor& t, std::size_t mode, Matrix& acc, double weight) {
  const auto d = static_cast<Eigen::Index>(t.dim(mode));
  if (acc.rows() != d || acc.cols() != d) throw std::invalid_argument("gram accumulator has wrong shape");
  Matrix g = mode_cross_gram(t, t, mode);
  // Exact symmetry regardless of the kernel's summation order.
  acc.noalias() += weight * (0.5 * (g + g.transpose()));
}

Matrix mode_gram(const Tensor& t, std::size_t mode) {
  check_mode(t, mode);
  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(t.dim(mode)), static_cast<Eigen::Index>(t.dim(mode)));
  accumulate_mode_gram(t, mode, acc);
  return acc;
}

Tensor outer_product(std::span<const Vector> factors) {
  if (factors.empty()) throw std::invalid_argument("outer_product: no factors");
  Dims dims;
  for (const Vector& f : factors) dims.push_back(static_cast<std::size_t>(f.size()));
  Tensor out(dims);
  double* x = out.data().data();
  x[0] = 1.0;
  // Expand one mode at a time: the filled prefix is scaled by
  // each entry of the next factor.
  std::size_t filled = 1;
  for (const Vector& f : factors) {
    for (Eigen::Index i = f.size(); i-- > 0;) {
      for (std::size_t l = 0; l < filled; ++l) x[static_cast<std::size_t>(i) * filled + l] = x[l] * f[i];
    }
    filled *= static_cast<std::size_t>(f.size());
  }
  return out;
}

}  // namespace tdk

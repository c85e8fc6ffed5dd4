#pragma once

#include <cstddef>
#include <string_view>

namespace tdk::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend backend);

// Inner-loop kernels over contiguous double arrays. Every backend computes the
// same quantities; results may differ from the scalar reference by rounding
// only (vector backends reassociate the sums).
struct KernelTable {
  Backend backend;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // y = x - y, elementwise
  void (*subtract_into)(const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels();

// Null when the backend was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// The table used by the tensor primitives on the calling thread. Defaults to the
// widest backend supported by the CPU; `TDK_SIMD=scalar` in the environment
// forces the scalar reference.
const KernelTable& active_kernels();

bool backend_available(Backend backend);

// Pins the active table for the current thread for the lifetime of the guard.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend);
  ~ScopedBackend();
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  const KernelTable* previous_;
};

}  // namespace tdk::simd

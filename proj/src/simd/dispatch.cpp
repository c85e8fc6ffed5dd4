#include <cstdlib>
#include <stdexcept>
#include <string>

#include "tdk/simd/kernels.hpp"

namespace tdk::simd {

#if !defined(TDK_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !defined(TDK_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &scalar_kernels();
    case Backend::Avx2:
      return avx2_kernels();
    case Backend::Neon:
      return neon_kernels();
  }
  return nullptr;
}

const KernelTable& default_kernels() {
  static const KernelTable* chosen = [] {
    const char* forced = std::getenv("TDK_SIMD");
    if (forced != nullptr && std::string(forced) == "scalar") return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    if (const KernelTable* t = neon_kernels()) return t;
    return &scalar_kernels();
  }();
  return *chosen;
}

thread_local const KernelTable* pinned = nullptr;

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

bool backend_available(Backend backend) { return table_for(backend) != nullptr; }

const KernelTable& active_kernels() { return pinned != nullptr ? *pinned : default_kernels(); }

ScopedBackend::ScopedBackend(Backend backend) : previous_(pinned) {
  const KernelTable* table = table_for(backend);
  if (table == nullptr) {
    throw std::runtime_error("SIMD backend '" + std::string(backend_name(backend)) +
                             "' is not available on this machine");
  }
  pinned = table;
}

ScopedBackend::~ScopedBackend() { pinned = previous_; }

}  // namespace tdk::simd

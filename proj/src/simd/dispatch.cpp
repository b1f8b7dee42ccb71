#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace mvreg::simd {

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(MVREG_BUILD_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(MVREG_BUILD_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon})
    if (backend_available(b)) out.push_back(b);
  return out;
}

const KernelTable& kernels(Backend backend) {
  if (!backend_available(backend))
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(backend)));
  switch (backend) {
#if defined(MVREG_BUILD_AVX2)
    case Backend::Avx2:
      return detail::avx2_table();
#endif
#if defined(MVREG_BUILD_NEON)
    case Backend::Neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

namespace {

Backend select_backend() {
  if (const char* env = std::getenv("MVREG_SIMD")) {
    const std::string name(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon})
      if (name == backend_name(b) && backend_available(b)) return b;
  }
  const auto all = available_backends();
  return all.back();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = kernels(select_backend());
  return table;
}

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

}  // namespace mvreg::simd

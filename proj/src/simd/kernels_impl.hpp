#pragma once

#include "mvreg/simd/kernels.hpp"

namespace mvreg::simd::detail {

const KernelTable& scalar_table();
#if defined(MVREG_BUILD_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(MVREG_BUILD_NEON)
const KernelTable& neon_table();
#endif

}  // namespace mvreg::simd::detail

#pragma once

// Data-parallel inner loops of the registration pipeline. Every kernel has a
// scalar reference implementation; vector variants are compiled per ISA and
// chosen at runtime. Element-wise kernels (distances, residuals, transforms)
// are bit-identical across backends. Reductions differ only in summation
// order.

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace mvreg::simd {

enum class Backend { Scalar, Avx2, Neon };

/// Structure-of-arrays view of n 3-D points.
struct Points3View {
  const double* x;
  const double* y;
  const double* z;
  std::size_t size;
};

struct WeightedSums {
  double weight = 0.0;
  std::array<double, 3> source{};
  std::array<double, 3> target{};
};

struct KernelTable {
  Backend backend;

  // out[m] = Σ_d (columns[d][m] − query[d])², m < count.
  void (*squared_distances)(const double* const* columns, std::size_t dims,
                            const double* query, std::size_t count, double* out);

  double (*min_value)(const double* values, std::size_t count);

  // Σw, Σw·p, Σw·q.
  WeightedSums (*weighted_sums)(Points3View source, Points3View target, const double* weights);

  // Row-major Σ w·(p − p̄)(q − q̄)ᵀ.
  std::array<double, 9> (*weighted_cross_covariance)(Points3View source, Points3View target,
                                                     const double* weights,
                                                     const double* source_mean,
                                                     const double* target_mean);

  // out[l] = ‖R·p_l + t − q_l‖₂ with R row-major.
  void (*residual_norms)(Points3View source, Points3View target, const double* rotation,
                         const double* translation, double* out);

  // (ox, oy, oz)[l] = R·p_l + t.
  void (*transform_points)(Points3View in, const double* rotation, const double* translation,
                           double* ox, double* oy, double* oz);
};

bool backend_available(Backend backend);
std::vector<Backend> available_backends();

/// Throws std::invalid_argument for a backend not compiled in or not
/// supported by the running CPU.
const KernelTable& kernels(Backend backend);

/// Backend used by the library: the best available one, unless the
/// MVREG_SIMD environment variable (scalar | avx2 | neon) names another.
const KernelTable& active_kernels();

std::string_view backend_name(Backend backend);

}  // namespace mvreg::simd

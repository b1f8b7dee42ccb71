#include <cmath>
#include <limits>

#include "kernels_impl.hpp"

namespace mvreg::simd::detail {
namespace {

void squared_distances(const double* const* columns, std::size_t dims, const double* query,
                       std::size_t count, double* out) {
  for (std::size_t m = 0; m < count; ++m) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = columns[d][m] - query[d];
      acc = acc + diff * diff;
    }
    out[m] = acc;
  }
}

double min_value(const double* values, std::size_t count) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < count; ++m) {
    if (values[m] < best) best = values[m];
  }
  return best;
}

WeightedSums weighted_sums(Points3View p, Points3View q, const double* w) {
  WeightedSums s;
  for (std::size_t l = 0; l < p.size; ++l) {
    s.weight += w[l];
    s.source[0] += w[l] * p.x[l];
    s.source[1] += w[l] * p.y[l];
    s.source[2] += w[l] * p.z[l];
    s.target[0] += w[l] * q.x[l];
    s.target[1] += w[l] * q.y[l];
    s.target[2] += w[l] * q.z[l];
  }
  return s;
}

std::array<double, 9> weighted_cross_covariance(Points3View p, Points3View q, const double* w,
                                                const double* pm, const double* qm) {
  std::array<double, 9> acc{};
  for (std::size_t l = 0; l < p.size; ++l) {
    const double dp[3] = {p.x[l] - pm[0], p.y[l] - pm[1], p.z[l] - pm[2]};
    const double dq[3] = {q.x[l] - qm[0], q.y[l] - qm[1], q.z[l] - qm[2]};
    for (int r = 0; r < 3; ++r) {
      const double wr = w[l] * dp[r];
      for (int c = 0; c < 3; ++c) acc[3 * r + c] += wr * dq[c];
    }
  }
  return acc;
}

void residual_norms(Points3View p, Points3View q, const double* R, const double* t, double* out) {
  for (std::size_t l = 0; l < p.size; ++l) {
    const double x = R[0] * p.x[l] + R[1] * p.y[l] + R[2] * p.z[l] + t[0] - q.x[l];
    const double y = R[3] * p.x[l] + R[4] * p.y[l] + R[5] * p.z[l] + t[1] - q.y[l];
    const double z = R[6] * p.x[l] + R[7] * p.y[l] + R[8] * p.z[l] + t[2] - q.z[l];
    out[l] = std::sqrt(x * x + y * y + z * z);
  }
}

void transform_points(Points3View p, const double* R, const double* t, double* ox, double* oy,
                      double* oz) {
  for (std::size_t l = 0; l < p.size; ++l) {
    const double x = R[0] * p.x[l] + R[1] * p.y[l] + R[2] * p.z[l] + t[0];
    const double y = R[3] * p.x[l] + R[4] * p.y[l] + R[5] * p.z[l] + t[1];
    const double z = R[6] * p.x[l] + R[7] * p.y[l] + R[8] * p.z[l] + t[2];
    ox[l] = x;
    oy[l] = y;
    oz[l] = z;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::Scalar,  squared_distances,         min_value,
                                 weighted_sums,    weighted_cross_covariance, residual_norms,
                                 transform_points};
  return table;
}

}  // namespace mvreg::simd::detail

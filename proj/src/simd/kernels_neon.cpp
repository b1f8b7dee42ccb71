// AArch64 Advanced SIMD variants (two double lanes). NEON is baseline on
// AArch64, so no runtime probe is needed.

#include <arm_neon.h>

#include <cmath>
#include <limits>

#include "kernels_impl.hpp"

namespace mvreg::simd::detail {
namespace {

inline double hsum(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

void squared_distances(const double* const* columns, std::size_t dims, const double* query,
                       std::size_t count, double* out) {
  std::size_t m = 0;
  for (; m + 2 <= count; m += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t d = 0; d < dims; ++d) {
      const float64x2_t diff = vsubq_f64(vld1q_f64(columns[d] + m), vdupq_n_f64(query[d]));
      acc = vaddq_f64(acc, vmulq_f64(diff, diff));
    }
    vst1q_f64(out + m, acc);
  }
  for (; m < count; ++m) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = columns[d][m] - query[d];
      acc = acc + diff * diff;
    }
    out[m] = acc;
  }
}

double min_value(const double* values, std::size_t count) {
  float64x2_t best2 = vdupq_n_f64(std::numeric_limits<double>::infinity());
  std::size_t m = 0;
  for (; m + 2 <= count; m += 2) best2 = vminq_f64(best2, vld1q_f64(values + m));
  double best = std::fmin(vgetq_lane_f64(best2, 0), vgetq_lane_f64(best2, 1));
  for (; m < count; ++m)
    if (values[m] < best) best = values[m];
  return best;
}

WeightedSums weighted_sums(Points3View p, Points3View q, const double* w) {
  float64x2_t sw = vdupq_n_f64(0.0);
  float64x2_t spx = sw, spy = sw, spz = sw, sqx = sw, sqy = sw, sqz = sw;
  std::size_t l = 0;
  for (; l + 2 <= p.size; l += 2) {
    const float64x2_t wl = vld1q_f64(w + l);
    sw = vaddq_f64(sw, wl);
    spx = vaddq_f64(spx, vmulq_f64(wl, vld1q_f64(p.x + l)));
    spy = vaddq_f64(spy, vmulq_f64(wl, vld1q_f64(p.y + l)));
    spz = vaddq_f64(spz, vmulq_f64(wl, vld1q_f64(p.z + l)));
    sqx = vaddq_f64(sqx, vmulq_f64(wl, vld1q_f64(q.x + l)));
    sqy = vaddq_f64(sqy, vmulq_f64(wl, vld1q_f64(q.y + l)));
    sqz = vaddq_f64(sqz, vmulq_f64(wl, vld1q_f64(q.z + l)));
  }
  WeightedSums s;
  s.weight = hsum(sw);
  s.source = {hsum(spx), hsum(spy), hsum(spz)};
  s.target = {hsum(sqx), hsum(sqy), hsum(sqz)};
  for (; l < p.size; ++l) {
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
  float64x2_t acc[9];
  for (auto& a : acc) a = vdupq_n_f64(0.0);
  std::size_t l = 0;
  for (; l + 2 <= p.size; l += 2) {
    const float64x2_t wl = vld1q_f64(w + l);
    const float64x2_t dp[3] = {vsubq_f64(vld1q_f64(p.x + l), vdupq_n_f64(pm[0])),
                               vsubq_f64(vld1q_f64(p.y + l), vdupq_n_f64(pm[1])),
                               vsubq_f64(vld1q_f64(p.z + l), vdupq_n_f64(pm[2]))};
    const float64x2_t dq[3] = {vsubq_f64(vld1q_f64(q.x + l), vdupq_n_f64(qm[0])),
                               vsubq_f64(vld1q_f64(q.y + l), vdupq_n_f64(qm[1])),
                               vsubq_f64(vld1q_f64(q.z + l), vdupq_n_f64(qm[2]))};
    for (int r = 0; r < 3; ++r) {
      const float64x2_t wr = vmulq_f64(wl, dp[r]);
      for (int c = 0; c < 3; ++c) acc[3 * r + c] = vaddq_f64(acc[3 * r + c], vmulq_f64(wr, dq[c]));
    }
  }
  std::array<double, 9> out;
  for (int k = 0; k < 9; ++k) out[k] = hsum(acc[k]);
  for (; l < p.size; ++l) {
    const double dp[3] = {p.x[l] - pm[0], p.y[l] - pm[1], p.z[l] - pm[2]};
    const double dq[3] = {q.x[l] - qm[0], q.y[l] - qm[1], q.z[l] - qm[2]};
    for (int r = 0; r < 3; ++r) {
      const double wr = w[l] * dp[r];
      for (int c = 0; c < 3; ++c) out[3 * r + c] += wr * dq[c];
    }
  }
  return out;
}

inline float64x2_t affine_row(const double* R, const double* t, int i, float64x2_t x,
                              float64x2_t y, float64x2_t z) {
  float64x2_t v = vmulq_f64(vdupq_n_f64(R[3 * i]), x);
  v = vaddq_f64(v, vmulq_f64(vdupq_n_f64(R[3 * i + 1]), y));
  v = vaddq_f64(v, vmulq_f64(vdupq_n_f64(R[3 * i + 2]), z));
  return vaddq_f64(v, vdupq_n_f64(t[i]));
}

void residual_norms(Points3View p, Points3View q, const double* R, const double* t, double* out) {
  std::size_t l = 0;
  for (; l + 2 <= p.size; l += 2) {
    const float64x2_t px = vld1q_f64(p.x + l), py = vld1q_f64(p.y + l), pz = vld1q_f64(p.z + l);
    const float64x2_t x = vsubq_f64(affine_row(R, t, 0, px, py, pz), vld1q_f64(q.x + l));
    const float64x2_t y = vsubq_f64(affine_row(R, t, 1, px, py, pz), vld1q_f64(q.y + l));
    const float64x2_t z = vsubq_f64(affine_row(R, t, 2, px, py, pz), vld1q_f64(q.z + l));
    float64x2_t n = vmulq_f64(x, x);
    n = vaddq_f64(n, vmulq_f64(y, y));
    n = vaddq_f64(n, vmulq_f64(z, z));
    vst1q_f64(out + l, vsqrtq_f64(n));
  }
  for (; l < p.size; ++l) {
    const double x = R[0] * p.x[l] + R[1] * p.y[l] + R[2] * p.z[l] + t[0] - q.x[l];
    const double y = R[3] * p.x[l] + R[4] * p.y[l] + R[5] * p.z[l] + t[1] - q.y[l];
    const double z = R[6] * p.x[l] + R[7] * p.y[l] + R[8] * p.z[l] + t[2] - q.z[l];
    out[l] = std::sqrt(x * x + y * y + z * z);
  }
}

void transform_points(Points3View p, const double* R, const double* t, double* ox, double* oy,
                      double* oz) {
  std::size_t l = 0;
  for (; l + 2 <= p.size; l += 2) {
    const float64x2_t px = vld1q_f64(p.x + l), py = vld1q_f64(p.y + l), pz = vld1q_f64(p.z + l);
    const float64x2_t x = affine_row(R, t, 0, px, py, pz);
    const float64x2_t y = affine_row(R, t, 1, px, py, pz);
    const float64x2_t z = affine_row(R, t, 2, px, py, pz);
    vst1q_f64(ox + l, x);
    vst1q_f64(oy + l, y);
    vst1q_f64(oz + l, z);
  }
  for (; l < p.size; ++l) {
    const double x = R[0] * p.x[l] + R[1] * p.y[l] + R[2] * p.z[l] + t[0];
    const double y = R[3] * p.x[l] + R[4] * p.y[l] + R[5] * p.z[l] + t[1];
    const double z = R[6] * p.x[l] + R[7] * p.y[l] + R[8] * p.z[l] + t[2];
    ox[l] = x;
    oy[l] = y;
    oz[l] = z;
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Backend::Neon,    squared_distances,         min_value,
                                 weighted_sums,    weighted_cross_covariance, residual_norms,
                                 transform_points};
  return table;
}

}  // namespace mvreg::simd::detail

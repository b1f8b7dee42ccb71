// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "kernels_impl.hpp"

namespace mvreg::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void squared_distances(const double* const* columns, std::size_t dims, const double* query,
                       std::size_t count, double* out) {
  std::size_t m = 0;
  for (; m + 4 <= count; m += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dims; ++d) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_loadu_pd(columns[d] + m), _mm256_set1_pd(query[d]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + m, acc);
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
  __m256d best4 = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t m = 0;
  for (; m + 4 <= count; m += 4) best4 = _mm256_min_pd(best4, _mm256_loadu_pd(values + m));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best4);
  double best = lanes[0];
  for (int k = 1; k < 4; ++k)
    if (lanes[k] < best) best = lanes[k];
  for (; m < count; ++m)
    if (values[m] < best) best = values[m];
  return best;
}

WeightedSums weighted_sums(Points3View p, Points3View q, const double* w) {
  __m256d sw = _mm256_setzero_pd();
  __m256d spx = sw, spy = sw, spz = sw, sqx = sw, sqy = sw, sqz = sw;
  std::size_t l = 0;
  for (; l + 4 <= p.size; l += 4) {
    const __m256d wl = _mm256_loadu_pd(w + l);
    sw = _mm256_add_pd(sw, wl);
    spx = _mm256_add_pd(spx, _mm256_mul_pd(wl, _mm256_loadu_pd(p.x + l)));
    spy = _mm256_add_pd(spy, _mm256_mul_pd(wl, _mm256_loadu_pd(p.y + l)));
    spz = _mm256_add_pd(spz, _mm256_mul_pd(wl, _mm256_loadu_pd(p.z + l)));
    sqx = _mm256_add_pd(sqx, _mm256_mul_pd(wl, _mm256_loadu_pd(q.x + l)));
    sqy = _mm256_add_pd(sqy, _mm256_mul_pd(wl, _mm256_loadu_pd(q.y + l)));
    sqz = _mm256_add_pd(sqz, _mm256_mul_pd(wl, _mm256_loadu_pd(q.z + l)));
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
  __m256d acc[9];
  for (auto& a : acc) a = _mm256_setzero_pd();
  const __m256d pmx = _mm256_set1_pd(pm[0]), pmy = _mm256_set1_pd(pm[1]),
                pmz = _mm256_set1_pd(pm[2]);
  const __m256d qmx = _mm256_set1_pd(qm[0]), qmy = _mm256_set1_pd(qm[1]),
                qmz = _mm256_set1_pd(qm[2]);
  std::size_t l = 0;
  for (; l + 4 <= p.size; l += 4) {
    const __m256d wl = _mm256_loadu_pd(w + l);
    const __m256d dp[3] = {_mm256_sub_pd(_mm256_loadu_pd(p.x + l), pmx),
                           _mm256_sub_pd(_mm256_loadu_pd(p.y + l), pmy),
                           _mm256_sub_pd(_mm256_loadu_pd(p.z + l), pmz)};
    const __m256d dq[3] = {_mm256_sub_pd(_mm256_loadu_pd(q.x + l), qmx),
                           _mm256_sub_pd(_mm256_loadu_pd(q.y + l), qmy),
                           _mm256_sub_pd(_mm256_loadu_pd(q.z + l), qmz)};
    for (int r = 0; r < 3; ++r) {
      const __m256d wr = _mm256_mul_pd(wl, dp[r]);
      for (int c = 0; c < 3; ++c) acc[3 * r + c] = _mm256_add_pd(acc[3 * r + c], _mm256_mul_pd(wr, dq[c]));
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

// Shared by residual_norms and transform_points: R·p + t for four points.
struct Affine4 {
  __m256d r[9];
  __m256d t[3];

  Affine4(const double* R, const double* tr) {
    for (int k = 0; k < 9; ++k) r[k] = _mm256_set1_pd(R[k]);
    for (int k = 0; k < 3; ++k) t[k] = _mm256_set1_pd(tr[k]);
  }

  __m256d row(int i, __m256d x, __m256d y, __m256d z) const {
    __m256d v = _mm256_mul_pd(r[3 * i], x);
    v = _mm256_add_pd(v, _mm256_mul_pd(r[3 * i + 1], y));
    v = _mm256_add_pd(v, _mm256_mul_pd(r[3 * i + 2], z));
    return _mm256_add_pd(v, t[i]);
  }
};

void residual_norms(Points3View p, Points3View q, const double* R, const double* t, double* out) {
  const Affine4 T(R, t);
  std::size_t l = 0;
  for (; l + 4 <= p.size; l += 4) {
    const __m256d px = _mm256_loadu_pd(p.x + l), py = _mm256_loadu_pd(p.y + l),
                  pz = _mm256_loadu_pd(p.z + l);
    const __m256d x = _mm256_sub_pd(T.row(0, px, py, pz), _mm256_loadu_pd(q.x + l));
    const __m256d y = _mm256_sub_pd(T.row(1, px, py, pz), _mm256_loadu_pd(q.y + l));
    const __m256d z = _mm256_sub_pd(T.row(2, px, py, pz), _mm256_loadu_pd(q.z + l));
    __m256d n = _mm256_mul_pd(x, x);
    n = _mm256_add_pd(n, _mm256_mul_pd(y, y));
    n = _mm256_add_pd(n, _mm256_mul_pd(z, z));
    _mm256_storeu_pd(out + l, _mm256_sqrt_pd(n));
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
  const Affine4 T(R, t);
  std::size_t l = 0;
  for (; l + 4 <= p.size; l += 4) {
    const __m256d px = _mm256_loadu_pd(p.x + l), py = _mm256_loadu_pd(p.y + l),
                  pz = _mm256_loadu_pd(p.z + l);
    const __m256d x = T.row(0, px, py, pz);
    const __m256d y = T.row(1, px, py, pz);
    const __m256d z = T.row(2, px, py, pz);
    _mm256_storeu_pd(ox + l, x);
    _mm256_storeu_pd(oy + l, y);
    _mm256_storeu_pd(oz + l, z);
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

const KernelTable& avx2_table() {
  static const KernelTable table{Backend::Avx2,    squared_distances,         min_value,
                                 weighted_sums,    weighted_cross_covariance, residual_norms,
                                 transform_points};
  return table;
}

}  // namespace mvreg::simd::detail

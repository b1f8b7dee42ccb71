#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "mvreg/simd/kernels.hpp"

namespace mvreg::simd {
namespace {

struct Cloud {
  std::vector<double> x, y, z;
  explicit Cloud(std::size_t n, std::mt19937_64& rng, double scale = 3.0) : x(n), y(n), z(n) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = u(rng);
      y[k] = u(rng);
      z[k] = u(rng);
    }
  }
  Points3View view() const { return {x.data(), y.data(), z.data(), x.size()}; }
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<Backend> vector_backends() {
  std::vector<Backend> out;
  for (Backend b : available_backends())
    if (b != Backend::Scalar) out.push_back(b);
  return out;
}

const std::vector<std::size_t> kSizes{1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 100, 1027};

TEST(KernelDispatch, ScalarAlwaysAvailable) {
  EXPECT_TRUE(backend_available(Backend::Scalar));
  EXPECT_EQ(kernels(Backend::Scalar).backend, Backend::Scalar);
  const auto all = available_backends();
  EXPECT_NE(std::find(all.begin(), all.end(), active_kernels().backend), all.end());
  EXPECT_EQ(backend_name(Backend::Avx2), "avx2");
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (!backend_available(b)) {
      EXPECT_THROW(kernels(b), std::invalid_argument);
    }
}

TEST(ScalarKernels, MatchNaiveFormulas) {
  std::mt19937_64 rng(1);
  const KernelTable& s = kernels(Backend::Scalar);
  const Cloud p(37, rng), q(37, rng);
  std::vector<double> w(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w) v = u(rng);

  const double rot[9] = {0, -1, 0, 1, 0, 0, 0, 0, 1};
  const double t[3] = {0.5, -1.0, 2.0};
  std::vector<double> r(37);
  s.residual_norms(p.view(), q.view(), rot, t, r.data());
  for (std::size_t k = 0; k < 37; ++k) {
    const double dx = -p.y[k] + t[0] - q.x[k];
    const double dy = p.x[k] + t[1] - q.y[k];
    const double dz = p.z[k] + t[2] - q.z[k];
    EXPECT_NEAR(r[k], std::sqrt(dx * dx + dy * dy + dz * dz), 1e-12);
  }

  const WeightedSums sums = s.weighted_sums(p.view(), q.view(), w.data());
  double sw = 0, spx = 0, sqz = 0;
  for (std::size_t k = 0; k < 37; ++k) {
    sw += w[k];
    spx += w[k] * p.x[k];
    sqz += w[k] * q.z[k];
  }
  EXPECT_NEAR(sums.weight, sw, 1e-12);
  EXPECT_NEAR(sums.source[0], spx, 1e-12);
  EXPECT_NEAR(sums.target[2], sqz, 1e-12);

  const double pm[3] = {0.1, 0.2, 0.3}, qm[3] = {-0.1, 0.0, 0.4};
  const auto cov = s.weighted_cross_covariance(p.view(), q.view(), w.data(), pm, qm);
  double c12 = 0;
  for (std::size_t k = 0; k < 37; ++k) c12 += w[k] * (p.y[k] - pm[1]) * (q.z[k] - qm[2]);
  EXPECT_NEAR(cov[1 * 3 + 2], c12, 1e-12);

  EXPECT_EQ(s.min_value(r.data(), r.size()), *std::min_element(r.begin(), r.end()));
}

TEST(KernelEquivalence, SquaredDistancesBitwise) {
  std::mt19937_64 rng(2);
  const KernelTable& ref = kernels(Backend::Scalar);
  for (Backend b : vector_backends()) {
    const KernelTable& vec = kernels(b);
    for (std::size_t dims : {1, 3, 8, 32, 33}) {
      for (std::size_t count : kSizes) {
        std::vector<std::vector<double>> cols(dims, std::vector<double>(count));
        std::normal_distribution<double> g(0.0, 10.0);
        for (auto& c : cols)
          for (double& v : c) v = g(rng);
        std::vector<const double*> ptrs;
        for (auto& c : cols) ptrs.push_back(c.data());
        std::vector<double> query(dims);
        for (double& v : query) v = g(rng);
        std::vector<double> a(count), c(count);
        ref.squared_distances(ptrs.data(), dims, query.data(), count, a.data());
        vec.squared_distances(ptrs.data(), dims, query.data(), count, c.data());
        EXPECT_TRUE(bitwise_equal(a, c)) << backend_name(b) << " dims " << dims << " count " << count;
        EXPECT_EQ(ref.min_value(a.data(), count), vec.min_value(a.data(), count));
      }
    }
  }
}

TEST(KernelEquivalence, MinValueExact) {
  std::mt19937_64 rng(3);
  const KernelTable& ref = kernels(Backend::Scalar);
  for (Backend b : vector_backends()) {
    for (std::size_t count : kSizes) {
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(count);
        std::uniform_real_distribution<double> u(-1e3, 1e3);
        for (double& x : v) x = u(rng);
        // Plant the minimum at every lane position in turn.
        v[static_cast<std::size_t>(trial) % count] = -5e3;
        EXPECT_EQ(ref.min_value(v.data(), count), kernels(b).min_value(v.data(), count));
      }
    }
  }
}

TEST(KernelEquivalence, ResidualsAndTransformsBitwise) {
  std::mt19937_64 rng(4);
  const KernelTable& ref = kernels(Backend::Scalar);
  const double rot[9] = {0.36, 0.48, -0.8, -0.8, 0.6, 0.0, 0.48, 0.64, 0.6};
  const double t[3] = {1.25, -0.5, 3.0};
  for (Backend b : vector_backends()) {
    const KernelTable& vec = kernels(b);
    for (std::size_t n : kSizes) {
      const Cloud p(n, rng), q(n, rng);
      std::vector<double> ra(n), rb(n);
      ref.residual_norms(p.view(), q.view(), rot, t, ra.data());
      vec.residual_norms(p.view(), q.view(), rot, t, rb.data());
      EXPECT_TRUE(bitwise_equal(ra, rb)) << backend_name(b) << " n " << n;

      std::vector<double> ax(n), ay(n), az(n), bx(n), by(n), bz(n);
      ref.transform_points(p.view(), rot, t, ax.data(), ay.data(), az.data());
      vec.transform_points(p.view(), rot, t, bx.data(), by.data(), bz.data());
      EXPECT_TRUE(bitwise_equal(ax, bx) && bitwise_equal(ay, by) && bitwise_equal(az, bz)) << backend_name(b);
    }
  }
}

TEST(KernelEquivalence, ReductionsWithinTolerance) {
  std::mt19937_64 rng(5);
  const KernelTable& ref = kernels(Backend::Scalar);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Backend b : vector_backends()) {
    const KernelTable& vec = kernels(b);
    for (std::size_t n : kSizes) {
      const Cloud p(n, rng), q(n, rng);
      std::vector<double> w(n);
      for (double& v : w) v = u(rng);
      const WeightedSums a = ref.weighted_sums(p.view(), q.view(), w.data());
      const WeightedSums c = vec.weighted_sums(p.view(), q.view(), w.data());
      // Scale of each sum: Σ|w·x|.
      double scale = 0.0;
      for (std::size_t k = 0; k < n; ++k) scale += w[k] * 3.0;
      EXPECT_NEAR(a.weight, c.weight, 1e-12 * scale);
      for (int d = 0; d < 3; ++d) {
        EXPECT_NEAR(a.source[static_cast<std::size_t>(d)], c.source[static_cast<std::size_t>(d)], 1e-12 * scale);
        EXPECT_NEAR(a.target[static_cast<std::size_t>(d)], c.target[static_cast<std::size_t>(d)], 1e-12 * scale);
      }
      const double pm[3] = {a.source[0] / a.weight, a.source[1] / a.weight, a.source[2] / a.weight};
      const double qm[3] = {a.target[0] / a.weight, a.target[1] / a.weight, a.target[2] / a.weight};
      const auto ca = ref.weighted_cross_covariance(p.view(), q.view(), w.data(), pm, qm);
      const auto cc = vec.weighted_cross_covariance(p.view(), q.view(), w.data(), pm, qm);
      for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(ca[k], cc[k], 1e-12 * scale * 36.0);
    }
  }
}

}  // namespace
}  // namespace mvreg::simd

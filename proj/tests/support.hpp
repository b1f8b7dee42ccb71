#pragma once

#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "mvreg/geometry.hpp"

namespace mvreg::testing {

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

// Uniform rotation from a normalized Gaussian quaternion, built without the library.
inline Mat3 random_rotation_matrix(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Rotation3 random_rotation(std::mt19937_64& rng) {
  return Rotation3::from_matrix(random_rotation_matrix(rng));
}

inline RigidMotion random_motion(std::mt19937_64& rng, double max_translation = 1.0) {
  std::uniform_real_distribution<double> u(-max_translation, max_translation);
  return {random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
}

inline Points random_points(std::mt19937_64& rng, Eigen::Index n, double half_extent = 1.0) {
  std::uniform_real_distribution<double> u(-half_extent, half_extent);
  Points p(n, 3);
  for (Eigen::Index r = 0; r < n; ++r)
    for (int c = 0; c < 3; ++c) p(r, c) = u(rng);
  return p;
}

inline Rotation3 rot_z_deg(double deg) { return Rotation3::about_axis(Vec3::UnitZ(), deg2rad(deg)); }

// Rotation angle straight from the quaternion of Rᵀ·S: 2·atan2(|v|, |w|).
inline double angle_between_deg(const Mat3& r, const Mat3& s) {
  const Eigen::Quaterniond q(Mat3(r.transpose() * s));
  return rad2deg(2.0 * std::atan2(q.vec().norm(), std::abs(q.w())));
}

// Points transformed one at a time through the homogeneous matrix.
inline Points transform_rows(const Mat4& m, const Points& p) {
  Points out(p.rows(), 3);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const Eigen::Vector4d h(p(r, 0), p(r, 1), p(r, 2), 1.0);
    out.row(r) = (m * h).head<3>().transpose();
  }
  return out;
}

}  // namespace mvreg::testing

#pragma once

#include <Eigen/Core>

#include "mvreg/error.hpp"

namespace mvreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// N×3, column-major: each coordinate is one contiguous column.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;
// N×D descriptor matrix, column-major.
using Features = Eigen::MatrixXd;

/// Element of SO(3). Only obtainable through validating factories or
/// project_to_so3, so a live Rotation3 always satisfies RᵀR = I, det R = +1.
class Rotation3 {
 public:
  Rotation3() = default;

  static Rotation3 identity() { return Rotation3(); }
  /// Throws InvalidRotation if ‖mᵀm − I‖_F or |det m − 1| exceed `tol`.
  static Rotation3 from_matrix(const Mat3& m, double tol = 1e-9);
  /// Right-handed rotation by `angle` radians about `axis` (normalized internally).
  static Rotation3 about_axis(const Vec3& axis, double angle);

  const Mat3& matrix() const { return m_; }
  Rotation3 inverse() const { return Rotation3(m_.transpose()); }

  Rotation3 operator*(const Rotation3& other) const { return Rotation3(m_ * other.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Rotation3(const Mat3& m) : m_(m) {}
  friend Rotation3 project_to_so3(const Mat3& m);

  Mat3 m_ = Mat3::Identity();
};

/// Frobenius distance of `m` from the closest-to-orthonormal conditions,
/// max(‖mᵀm − I‖_F, |det m − 1|).
double so3_violation(const Mat3& m);

/// Rigid motion p ↦ R·p + t.
struct RigidMotion {
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();

  static RigidMotion identity() { return {}; }
  /// Validates the bottom row (0 0 0 1) and the rotation block at `tol`.
  static RigidMotion from_matrix(const Mat4& m, double tol = 1e-9);

  Mat4 matrix() const;
  Vec3 operator()(const Vec3& p) const { return rotation * p + translation; }
};

/// compose(a, b) applies b first, then a.
RigidMotion compose(const RigidMotion& a, const RigidMotion& b);
RigidMotion invert(const RigidMotion& m);

/// Scan-i frame to scan-j frame for absolute poses mi, mj (scan → world):
/// M_ij = M_j⁻¹·M_i.
RigidMotion relative_from_absolute(const RigidMotion& mi, const RigidMotion& mj);

/// Nearest rotation in Frobenius norm: U·diag(1, 1, det(UVᵀ))·Vᵀ for m = UΣVᵀ.
/// Throws DegenerateMatrix when m is non-finite or has rank < 2
/// (σ₂ ≤ 1e-12·σ₁).
Rotation3 project_to_so3(const Mat3& m);

/// Geodesic distance on SO(3) in radians, arccos((tr(aᵀb) − 1) / 2).
double geodesic_angle(const Rotation3& a, const Rotation3& b);

class PointCloud {
 public:
  /// Requires N ≥ 1, finite coordinates, and (if non-empty) one feature row per point.
  explicit PointCloud(Points points, Features features = Features());

  Eigen::Index size() const { return points_.rows(); }
  const Points& points() const { return points_; }
  const Features& features() const { return features_; }
  bool has_features() const { return features_.cols() > 0; }
  Eigen::Index feature_dim() const { return features_.cols(); }

 private:
  Points points_;
  Features features_;
};

/// Applies `m` to every point; features are carried over unchanged.
PointCloud apply(const RigidMotion& m, const PointCloud& cloud);
/// Same transform on a bare point matrix.
Points apply(const RigidMotion& m, const Points& points);

constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace mvreg

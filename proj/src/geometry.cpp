#include "mvreg/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace mvreg {

double so3_violation(const Mat3& m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = std::abs(m.determinant() - 1.0);
  return std::max(ortho, det);
}

Rotation3 Rotation3::from_matrix(const Mat3& m, double tol) {
  if (!m.allFinite() || so3_violation(m) > tol)
    throw Error(ErrorCode::InvalidRotation, "matrix is not in SO(3)");
  return Rotation3(m);
}

Rotation3 Rotation3::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle))
    throw Error(ErrorCode::InvalidArgument, "rotation axis must be non-zero and finite");
  return Rotation3(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix());
}

RigidMotion RigidMotion::from_matrix(const Mat4& m, double tol) {
  const Eigen::RowVector4d bottom(0, 0, 0, 1);
  if (!m.allFinite() || (m.row(3) - bottom).norm() > tol)
    throw Error(ErrorCode::InvalidArgument, "homogeneous matrix must end in (0 0 0 1)");
  return {Rotation3::from_matrix(m.topLeftCorner<3, 3>(), tol), m.topRightCorner<3, 1>()};
}

Mat4 RigidMotion::matrix() const {
  Mat4 out = Mat4::Identity();
  out.topLeftCorner<3, 3>() = rotation.matrix();
  out.topRightCorner<3, 1>() = translation;
  return out;
}

RigidMotion compose(const RigidMotion& a, const RigidMotion& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidMotion invert(const RigidMotion& m) {
  const Rotation3 rt = m.rotation.inverse();
  return {rt, -(rt * m.translation)};
}

RigidMotion relative_from_absolute(const RigidMotion& mi, const RigidMotion& mj) {
  return compose(invert(mj), mi);
}

Rotation3 project_to_so3(const Mat3& m) {
  if (!m.allFinite()) throw Error(ErrorCode::DegenerateMatrix, "non-finite matrix");
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-12 * s(0))
    throw Error(ErrorCode::DegenerateMatrix, "rank < 2, nearest rotation is not unique");
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return Rotation3(u * d.asDiagonal() * v.transpose());
}

double geodesic_angle(const Rotation3& a, const Rotation3& b) {
  // atan2 of the sine and cosine parts stays accurate near 0 and π, where acos does not.
  const Mat3 r = a.matrix().transpose() * b.matrix();
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double c = (r.trace() - 1.0) / 2.0;
  return std::atan2(axis.norm() / 2.0, c);
}

PointCloud::PointCloud(Points points, Features features)
    : points_(std::move(points)), features_(std::move(features)) {
  if (points_.rows() < 1) throw Error(ErrorCode::InvalidPointCloud, "cloud needs at least one point");
  if (!points_.allFinite()) throw Error(ErrorCode::InvalidPointCloud, "non-finite coordinate");
  if (features_.size() > 0 && features_.rows() != points_.rows())
    throw Error(ErrorCode::InvalidPointCloud, "feature rows do not match point count");
  if (features_.size() == 0) features_.resize(0, 0);
}

Points apply(const RigidMotion& m, const Points& points) {
  Points out(points.rows(), 3);
  const auto r = detail::row_major(m.rotation.matrix());
  simd::active_kernels().transform_points(detail::view_of(points), r.data(), m.translation.data(),
                                          out.col(0).data(), out.col(1).data(), out.col(2).data());
  return out;
}

PointCloud apply(const RigidMotion& m, const PointCloud& cloud) {
  return PointCloud(apply(m, cloud.points()), cloud.features());
}

}  // namespace mvreg

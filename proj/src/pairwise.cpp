#include "mvreg/pairwise.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace mvreg {
namespace {

// Softmax terms more than this many temperatures behind the nearest
// neighbour weigh below e^-60 relative to it and are skipped.
constexpr double kSoftmaxSpan = 60.0;

RigidMotion wls_impl(const Points& source, const Points& target, const Eigen::VectorXd& w) {
  if (source.rows() < 3)
    throw Error(ErrorCode::DegenerateConfiguration, "need at least three correspondences");
  const auto& k = simd::active_kernels();
  const auto ps = detail::view_of(source);
  const auto qs = detail::view_of(target);
  const simd::WeightedSums sums = k.weighted_sums(ps, qs, w.data());
  if (!(sums.weight > 0.0)) throw Error(ErrorCode::ZeroWeightSum, "correspondence weights sum to zero");

  const Vec3 p_mean = Vec3(sums.source[0], sums.source[1], sums.source[2]) / sums.weight;
  const Vec3 q_mean = Vec3(sums.target[0], sums.target[1], sums.target[2]) / sums.weight;
  const auto s = k.weighted_cross_covariance(ps, qs, w.data(), p_mean.data(), q_mean.data());
  const Mat3 cov = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(s.data());

  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0))
    throw Error(ErrorCode::DegenerateConfiguration, "weighted support is collinear or coincident");
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  const Vec3 d(1.0, 1.0, (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  const Rotation3 r = Rotation3::from_matrix(v * d.asDiagonal() * u.transpose());
  return {r, q_mean - r * p_mean};
}

Eigen::VectorXd residuals_impl(const Points& source, const Points& target, const RigidMotion& m) {
  Eigen::VectorXd out(source.rows());
  const auto r = detail::row_major(m.rotation.matrix());
  simd::active_kernels().residual_norms(detail::view_of(source), detail::view_of(target), r.data(),
                                        m.translation.data(), out.data());
  return out;
}

}  // namespace

CorrespondenceSet::CorrespondenceSet(Points source_pts, Points target_pts)
    : source(std::move(source_pts)), target(std::move(target_pts)) {
  weights = Eigen::VectorXd::Ones(source.rows());
  residuals = Eigen::VectorXd::Zero(source.rows());
  validate();
}

CorrespondenceSet::CorrespondenceSet(Points source_pts, Points target_pts, Eigen::VectorXd w,
                                     Eigen::VectorXd r)
    : source(std::move(source_pts)), target(std::move(target_pts)), weights(std::move(w)),
      residuals(std::move(r)) {
  validate();
}

void CorrespondenceSet::validate() const {
  const Eigen::Index n = source.rows();
  if (n < 1 || target.rows() != n || weights.size() != n || residuals.size() != n)
    throw Error(ErrorCode::InvalidArgument, "correspondence arrays must share one non-zero length");
  if (!source.allFinite() || !target.allFinite() || !weights.allFinite() || !residuals.allFinite())
    throw Error(ErrorCode::InvalidArgument, "non-finite correspondence data");
  if ((weights.array() < 0.0).any() || (weights.array() > 1.0).any())
    throw Error(ErrorCode::InvalidArgument, "weights must lie in [0, 1]");
  if ((residuals.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "residuals must be non-negative");
}

SoftMatcher::SoftMatcher(const Features& target_features, const Points& target_points,
                         double temperature)
    : features_(target_features), points_(target_points), temperature_(temperature) {
  if (target_features.rows() == 0 || target_points.rows() == 0)
    throw Error(ErrorCode::EmptyTarget, "no target candidates");
  if (target_features.rows() != target_points.rows())
    throw Error(ErrorCode::DimensionMismatch, "target features and points differ in count");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  for (Eigen::Index d = 0; d < features_.cols(); ++d) columns_.push_back(features_.col(d).data());
  scratch_.resize(static_cast<std::size_t>(features_.rows()));
}

double SoftMatcher::numerators(const Eigen::Ref<const Eigen::VectorXd>& query) {
  if (query.size() != features_.cols())
    throw Error(ErrorCode::DimensionMismatch, "query feature dimension differs from targets");
  const auto& k = simd::active_kernels();
  const std::size_t count = scratch_.size();
  const Eigen::VectorXd q = query;
  k.squared_distances(columns_.data(), columns_.size(), q.data(), count, scratch_.data());
  const double nearest = std::sqrt(k.min_value(scratch_.data(), count));
  const double reach = nearest + kSoftmaxSpan * temperature_;
  const double reach2 = reach * reach;
  double sum = 0.0;
  for (std::size_t m = 0; m < count; ++m) {
    const double d2 = scratch_[m];
    if (d2 <= reach2) {
      const double e = std::exp(-(std::sqrt(d2) - nearest) / temperature_);
      scratch_[m] = e;
      sum += e;
    } else {
      scratch_[m] = 0.0;
    }
  }
  return sum;
}

Vec3 SoftMatcher::assign(const Eigen::Ref<const Eigen::VectorXd>& query) {
  const double sum = numerators(query);
  Vec3 acc = Vec3::Zero();
  for (std::size_t m = 0; m < scratch_.size(); ++m) {
    if (scratch_[m] != 0.0) acc += scratch_[m] * points_.row(static_cast<Eigen::Index>(m)).transpose();
  }
  return acc / sum;
}

Eigen::VectorXd SoftMatcher::probabilities(const Eigen::Ref<const Eigen::VectorXd>& query) {
  const double sum = numerators(query);
  return Eigen::Map<const Eigen::VectorXd>(scratch_.data(), static_cast<Eigen::Index>(scratch_.size())) / sum;
}

Vec3 soft_assign(const Eigen::Ref<const Eigen::VectorXd>& query_feature,
                 const Features& target_features, const Points& target_points, double temperature) {
  SoftMatcher matcher(target_features, target_points, temperature);
  return matcher.assign(query_feature);
}

CorrespondenceSet build_correspondences(const PointCloud& p, const PointCloud& q, double temperature) {
  if (!p.has_features() || !q.has_features())
    throw Error(ErrorCode::MissingFeatures, "both clouds need descriptors");
  if (p.feature_dim() != q.feature_dim())
    throw Error(ErrorCode::DimensionMismatch, "descriptor dimensions differ");
  SoftMatcher matcher(q.features(), q.points(), temperature);
  Points target(p.size(), 3);
  Eigen::VectorXd query(p.feature_dim());
  for (Eigen::Index l = 0; l < p.size(); ++l) {
    query = p.features().row(l).transpose();
    target.row(l) = matcher.assign(query).transpose();
  }
  return CorrespondenceSet(p.points(), std::move(target));
}

RigidMotion wls_transform(const CorrespondenceSet& c) {
  c.validate();
  return wls_impl(c.source, c.target, c.weights);
}

Eigen::VectorXd residuals(const CorrespondenceSet& c, const RigidMotion& m) {
  return residuals_impl(c.source, c.target, m);
}

Eigen::VectorXd robust_reweight(const Eigen::VectorXd& residuals, const Eigen::VectorXd& prev_weights,
                                double blend) {
  if (residuals.size() != prev_weights.size())
    throw Error(ErrorCode::LengthMismatch, "residuals and previous weights differ in length");
  if (!(blend >= 0.0 && blend <= 1.0)) throw Error(ErrorCode::InvalidArgument, "blend must lie in [0, 1]");
  if (residuals.size() == 0) return {};
  const std::span<const double> r(residuals.data(), static_cast<std::size_t>(residuals.size()));
  const double scale = std::max(1.4826 * detail::median_absolute_deviation(r), kMadFloor);
  Eigen::VectorXd out(residuals.size());
  for (Eigen::Index l = 0; l < residuals.size(); ++l) {
    const double u = residuals[l] / scale;
    const double kernel = 1.0 / (1.0 + u * u);
    out[l] = std::clamp(blend * kernel + (1.0 - blend) * prev_weights[l], 0.0, 1.0);
  }
  return out;
}

double local_confidence(double inlier_ratio, double median_residual, const LocalConfidenceParams& params) {
  const double logistic = 1.0 / (1.0 + std::exp(-params.steepness * (inlier_ratio - params.inlier_midpoint)));
  return logistic / (1.0 + median_residual / params.residual_scale);
}

double inlier_ratio(const Eigen::VectorXd& weights, double w_thresh) {
  if (weights.size() == 0) return 0.0;
  return static_cast<double>((weights.array() > w_thresh).count()) / static_cast<double>(weights.size());
}

PairwiseResult register_correspondences(const CorrespondenceSet& c, const PairwiseConfig& cfg) {
  c.validate();
  PairwiseResult out;
  out.weights = Eigen::VectorXd::Ones(c.size());
  out.motion = wls_impl(c.source, c.target, out.weights);
  out.converged = cfg.inner_irls <= 0;
  for (int it = 0; it < cfg.inner_irls; ++it) {
    const Eigen::VectorXd r = residuals_impl(c.source, c.target, out.motion);
    Eigen::VectorXd w = robust_reweight(r, out.weights, 1.0);
    RigidMotion next;
    try {
      next = wls_impl(c.source, c.target, w);
    } catch (const Error&) {
      break;  // reweighting collapsed the support; keep the last valid iterate
    }
    const double change = (next.matrix() - out.motion.matrix()).norm();
    out.motion = next;
    out.weights = std::move(w);
    out.iterations = it + 1;
    if (change < cfg.motion_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.residuals = residuals_impl(c.source, c.target, out.motion);
  out.inlier_ratio = inlier_ratio(out.weights, cfg.w_thresh);
  const std::span<const double> r(out.residuals.data(), static_cast<std::size_t>(out.residuals.size()));
  out.local_confidence = local_confidence(out.inlier_ratio, detail::median(r), cfg.confidence);
  return out;
}

PairwiseResult register_pair(const PointCloud& p, const PointCloud& q, const PairwiseConfig& cfg) {
  return register_correspondences(build_correspondences(p, q, cfg.temperature), cfg);
}

}  // namespace mvreg

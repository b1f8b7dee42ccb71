#pragma once

#include <Eigen/Core>

#include <vector>

#include "mvreg/geometry.hpp"

namespace mvreg {

/// Putative correspondences Γ: source point p_l in scan i paired with a
/// (soft) target q_l in scan j, with per-row weight and residual.
struct CorrespondenceSet {
  Points source;
  Points target;
  Eigen::VectorXd weights;
  Eigen::VectorXd residuals;

  /// Unit weights and zero residuals.
  CorrespondenceSet(Points source_pts, Points target_pts);
  CorrespondenceSet(Points source_pts, Points target_pts, Eigen::VectorXd w, Eigen::VectorXd r);

  Eigen::Index size() const { return source.rows(); }
  /// Throws InvalidArgument unless lengths agree, N ≥ 1, weights ∈ [0,1],
  /// residuals ≥ 0 and everything is finite.
  void validate() const;
};

struct LocalConfidenceParams {
  double steepness = 10.0;        // k
  double inlier_midpoint = 0.3;   // δ₀
  double residual_scale = 0.05;   // ρ, meters
};

struct PairwiseConfig {
  double temperature = 0.02;
  int inner_irls = 5;
  double motion_tolerance = 1e-8;
  double w_thresh = 0.5;
  LocalConfidenceParams confidence;
};

struct PairwiseResult {
  RigidMotion motion;
  Eigen::VectorXd weights;
  Eigen::VectorXd residuals;
  double inlier_ratio = 0.0;
  double local_confidence = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Softmax-weighted nearest neighbour in feature space. Reuses its distance
/// buffer across queries, so one matcher must not be shared between threads.
class SoftMatcher {
 public:
  /// Throws EmptyTarget for M = 0, DimensionMismatch when the row counts of
  /// features and points differ, InvalidArgument for temperature ≤ 0.
  SoftMatcher(const Features& target_features, const Points& target_points, double temperature);

  /// sᵀQ with s_l ∝ exp(−‖f_l − query‖ / t).
  Vec3 assign(const Eigen::Ref<const Eigen::VectorXd>& query);
  /// The dense probability vector s.
  Eigen::VectorXd probabilities(const Eigen::Ref<const Eigen::VectorXd>& query);

 private:
  // Fills scratch_ with softmax numerators; returns their sum.
  double numerators(const Eigen::Ref<const Eigen::VectorXd>& query);

  const Features& features_;
  const Points& points_;
  double temperature_;
  std::vector<const double*> columns_;
  std::vector<double> scratch_;
};

Vec3 soft_assign(const Eigen::Ref<const Eigen::VectorXd>& query_feature,
                 const Features& target_features, const Points& target_points, double temperature);

/// One soft correspondence in q for every point of p; weights 1, residuals 0.
/// Throws MissingFeatures or DimensionMismatch.
CorrespondenceSet build_correspondences(const PointCloud& p, const PointCloud& q,
                                        double temperature);

/// Closed-form weighted Procrustes: argmin Σ w_l ‖R·p_l + t − q_l‖².
/// Throws ZeroWeightSum, DegenerateConfiguration.
RigidMotion wls_transform(const CorrespondenceSet& c);

/// r_l = ‖R·p_l + t − q_l‖₂.
Eigen::VectorXd residuals(const CorrespondenceSet& c, const RigidMotion& m);

/// Robust scale below which the MAD is floored (meters).
inline constexpr double kMadFloor = 1e-9;

/// Cauchy reweighting with MAD scale, blended with the previous weights:
/// w = blend·1/(1 + (r/s)²) + (1 − blend)·prev, s = 1.4826·MAD(r) ≥ kMadFloor.
/// Takes the previous weights and residuals so a learned weighting function
/// could replace the kernel behind the same call.
Eigen::VectorXd robust_reweight(const Eigen::VectorXd& residuals, const Eigen::VectorXd& prev_weights,
                                double blend);

/// logistic(k·(δ − δ₀)) / (1 + median_residual/ρ).
double local_confidence(double inlier_ratio, double median_residual,
                        const LocalConfidenceParams& params = {});

/// Fraction of weights strictly above `w_thresh`.
double inlier_ratio(const Eigen::VectorXd& weights, double w_thresh);

/// IRLS from a given correspondence set: uniform-weight fit, then up to
/// cfg.inner_irls rounds of residuals → robust_reweight → wls_transform.
PairwiseResult register_correspondences(const CorrespondenceSet& c, const PairwiseConfig& cfg = {});

/// build_correspondences followed by register_correspondences.
PairwiseResult register_pair(const PointCloud& p, const PointCloud& q, const PairwiseConfig& cfg = {});

}  // namespace mvreg

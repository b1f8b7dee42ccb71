#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/pose_graph.hpp"
#include "mvreg/synchronization.hpp"

namespace mvreg {

/// ECDF thresholds of the standard multiview benchmark tables.
inline const std::vector<double> kRotationThresholdsDeg{3.0, 5.0, 10.0, 30.0, 45.0};
inline const std::vector<double> kTranslationThresholdsM{0.05, 0.1, 0.25, 0.5, 0.75};

/// Geodesic angle in degrees.
double angular_error(const Rotation3& a, const Rotation3& b);

/// Fraction of errors ≤ each threshold. Throws EmptyErrors, or
/// InvalidArgument if thresholds are not ascending.
std::vector<double> ecdf(std::span<const double> errors, std::span<const double> thresholds);

struct RecallPair {
  RigidMotion estimate;
  RigidMotion ground_truth;
  /// Source points of the ground-truth correspondences; their true matches
  /// are ground_truth(p).
  Points points;
};

/// sqrt(mean ‖estimate(p) − ground_truth(p)‖²).
double registration_rmse(const RecallPair& pair);

/// Fraction of pairs with RMSE below `rmse_thresh`. Throws EmptyPairs.
double registration_recall(std::span<const RecallPair> pairs, double rmse_thresh = 0.2);

struct SyncPairError {
  double rotation = 0.0;     // mean ‖R*_ij − R^gt_ij‖_F
  double translation = 0.0;  // mean ‖t*_ij − t^gt_ij‖₂, meters
};

/// Averaged over all pairs i < j of relative motions, hence gauge-free.
/// Throws LengthMismatch.
SyncPairError sync_pair_error(std::span<const RigidMotion> estimate, std::span<const RigidMotion> ground_truth);
SyncPairError sync_pair_error(const SyncResult& estimate, std::span<const RigidMotion> ground_truth);

/// Estimated motion from frame i to frame j.
struct RelativeEstimate {
  NodeId i;
  NodeId j;
  RigidMotion motion;
};

/// Relatives M_j⁻¹M_i for the listed pairs, or for all i < j when `pairs` is empty.
std::vector<RelativeEstimate> relatives_from_absolute(std::span<const RigidMotion> absolute,
                                                      std::span<const EdgeKey> pairs = {});

struct ErrorReport {
  std::vector<double> rotation_errors_deg;
  std::vector<double> translation_errors_m;
  std::vector<double> rotation_thresholds_deg;
  std::vector<double> translation_thresholds_m;
  std::vector<double> ecdf_rotation;
  std::vector<double> ecdf_translation;
  double mean_rotation_deg = 0.0;
  double median_rotation_deg = 0.0;
  double mean_translation_m = 0.0;
  double median_translation_m = 0.0;
};

/// Per-pair errors of relative estimates against ground-truth absolute poses.
/// Throws EmptyErrors, IndexOutOfRange.
ErrorReport evaluate_relative(std::span<const RelativeEstimate> estimates,
                              std::span<const RigidMotion> ground_truth,
                              std::span<const double> rotation_thresholds_deg = kRotationThresholdsDeg,
                              std::span<const double> translation_thresholds_m = kTranslationThresholdsM);

/// Same on absolute poses; compares the relatives of `pairs` (all pairs if empty).
/// Throws LengthMismatch.
ErrorReport evaluate_absolute(std::span<const RigidMotion> estimate, std::span<const RigidMotion> ground_truth,
                              std::span<const EdgeKey> pairs = {},
                              std::span<const double> rotation_thresholds_deg = kRotationThresholdsDeg,
                              std::span<const double> translation_thresholds_m = kTranslationThresholdsM);

/// Header row of the ECDF table: "Method & 3° & … & Mean/Med. & 0.05 & … & Mean/Med. \\".
std::string ecdf_table_header(const ErrorReport& report);
/// One table row: ECDF percentages with one decimal, then mean/median.
std::string ecdf_table_row(const ErrorReport& report, std::string_view label);

}  // namespace mvreg

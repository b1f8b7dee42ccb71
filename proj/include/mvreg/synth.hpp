#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/pose_graph.hpp"

namespace mvreg {

enum class EdgeLabel { Inlier, Outlier };

struct SceneConfig {
  int n_scans = 10;
  int pts_per_scan = 2048;
  double noise_sigma = 0.01;
  double outlier_edge_fraction = 0.0;
  std::uint64_t seed = 0;
  /// Expected fraction of a scan's points also seen by any other scan.
  double overlap = 0.7;
  /// Descriptors are feature_scale · canonical coordinates plus per-scan noise.
  double feature_scale = 20.0;
  double descriptor_noise = 0.1;
  double min_outlier_angle_deg = 30.0;
};

struct SyntheticScene {
  std::vector<PointCloud> clouds;
  /// Scan-to-world poses.
  std::vector<RigidMotion> ground_truth;
  /// One label per pair i < j.
  std::map<EdgeKey, EdgeLabel> edge_labels;
  /// Motion applied to the correspondence targets of each outlier pair.
  std::map<EdgeKey, RigidMotion> corruptions;
};

/// Uniformly distributed rotation.
Rotation3 random_rotation(std::mt19937_64& rng);

/// Room-like box with an interior desk, scanned from random poses. Deterministic under seed.
/// Throws InvalidArgument for n_scans < 3, fraction outside [0,1] or non-positive sizes.
SyntheticScene generate_scene(const SceneConfig& cfg);

SyntheticScene generate_scene(int n_scans, int pts_per_scan, double noise_sigma, double outlier_edge_fraction,
                              std::uint64_t seed);

}  // namespace mvreg

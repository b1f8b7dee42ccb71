#pragma once

#include <Eigen/Core>

#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/pose_graph.hpp"

namespace mvreg {

struct SyncResult {
  /// Scan → world poses; node 0 is the world frame.
  std::vector<RigidMotion> absolute;
  /// λ₄ − λ₃ of the rotation Laplacian.
  double rotation_eigengap = 0.0;
  /// Four smallest eigenvalues of the rotation Laplacian, ascending.
  Eigen::Vector4d rotation_spectrum = Eigen::Vector4d::Zero();
  /// 3n − rank of the translation normal matrix (3 for a connected graph:
  /// the translation gauge).
  int translation_rank_deficiency = 0;
  /// Synchronization rounds that produced `absolute`.
  int rounds_completed = 0;
  /// Set when confidence collapse disconnected the graph and `absolute`
  /// holds the last valid round.
  bool disconnected = false;
};

struct SyncConfig {
  double gamma = 3.0;
  double beta = 1.0;
};

/// Symmetric 3n×3n matrix L = D − A over active edges, weighted by c_fused.
/// With Y_i = R_iᵀ stacked, L·Y = 0 for consistent edges: block (i, j) of A
/// is c_ij·R̂_ijᵀ and block (j, i) is c_ij·R̂_ij.
Eigen::MatrixXd rotation_laplacian(const PoseGraph& g);

struct RotationSyncOutput {
  std::vector<Rotation3> rotations;
  Eigen::Vector4d spectrum = Eigen::Vector4d::Zero();
  double eigengap = 0.0;
};

/// Spectral rotation averaging; rotations[0] = I. Throws DisconnectedGraph,
/// EigenSolverFailure.
RotationSyncOutput rotation_sync_detailed(const PoseGraph& g);
std::vector<Rotation3> rotation_sync(const PoseGraph& g);

/// Σ c_ij ‖t_i − t_j − R_j·t̂_ij‖² over active edges: the translation
/// least-squares objective restated for scan → world poses.
double translation_objective(const PoseGraph& g, std::span<const Rotation3> rotations,
                             std::span<const Vec3> translations);

struct TranslationSyncOutput {
  std::vector<Vec3> translations;
  int rank_deficiency = 0;
};

/// Pseudoinverse solution of the translation normal equations (cutoff
/// 1e-10 relative), shifted so translations[0] = 0. Throws DisconnectedGraph.
TranslationSyncOutput translation_sync_detailed(const PoseGraph& g, std::span<const Rotation3> rotations);
std::vector<Vec3> translation_sync(const PoseGraph& g, std::span<const Rotation3> rotations);

struct SyncOutcome {
  SyncResult result;
  /// Input graph with c_global and c_fused from the last completed round.
  PoseGraph graph;
};

/// `rounds` passes of rotation_sync → translation_sync → edge residuals →
/// Cauchy global confidence → harmonic fusion into c_fused.
SyncOutcome transf_sync(const PoseGraph& g, int rounds = 4, const SyncConfig& cfg = {});

}  // namespace mvreg

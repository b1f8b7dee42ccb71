#include "mvreg/synchronization.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "internal.hpp"

namespace mvreg {
namespace {

void require_connected(const PoseGraph& g) {
  if (!is_weight_connected(g))
    throw Error(ErrorCode::DisconnectedGraph, "active edges with positive confidence do not span all nodes");
}

}  // namespace

Eigen::MatrixXd rotation_laplacian(const PoseGraph& g) {
  const Eigen::Index n = g.node_count();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (const Edge& e : g.edges()) {
    if (!e.active) continue;
    const double c = e.c_fused;
    const Mat3& r = e.motion.rotation.matrix();
    const Eigen::Index i = 3 * e.i, j = 3 * e.j;
    lap.block<3, 3>(i, i).diagonal().array() += c;
    lap.block<3, 3>(j, j).diagonal().array() += c;
    lap.block<3, 3>(i, j) -= c * r.transpose();
    lap.block<3, 3>(j, i) -= c * r;
  }
  return lap;
}

RotationSyncOutput rotation_sync_detailed(const PoseGraph& g) {
  require_connected(g);
  const int n = g.node_count();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rotation_laplacian(g));
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::EigenSolverFailure, "symmetric eigensolver did not converge");

  // Eigenvalues come sorted ascending; the first three columns span the
  // stacked R_iᵀ up to a common 3×3 orthogonal factor.
  Eigen::MatrixXd v = eig.eigenvectors().leftCols(3);
  int positive = 0;
  for (int i = 0; i < n; ++i)
    if (v.block<3, 3>(3 * i, 0).determinant() > 0.0) ++positive;
  if (2 * positive < n) v = -v;

  RotationSyncOutput out;
  out.rotations.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.rotations.push_back(project_to_so3(v.block<3, 3>(3 * i, 0)).inverse());
  const Rotation3 gauge = out.rotations[0].inverse();
  for (Rotation3& r : out.rotations) r = gauge * r;
  out.rotations[0] = Rotation3::identity();

  out.spectrum = eig.eigenvalues().head<4>();
  out.eigengap = std::max(0.0, out.spectrum(3) - out.spectrum(2));
  return out;
}

std::vector<Rotation3> rotation_sync(const PoseGraph& g) { return rotation_sync_detailed(g).rotations; }

double translation_objective(const PoseGraph& g, std::span<const Rotation3> rotations,
                             std::span<const Vec3> translations) {
  double total = 0.0;
  for (const Edge& e : g.edges()) {
    if (!e.active) continue;
    const auto i = static_cast<std::size_t>(e.i), j = static_cast<std::size_t>(e.j);
    const Vec3 err = translations[i] - translations[j] - rotations[j] * e.motion.translation;
    total += e.c_fused * err.squaredNorm();
  }
  return total;
}

TranslationSyncOutput translation_sync_detailed(const PoseGraph& g, std::span<const Rotation3> rotations) {
  require_connected(g);
  const Eigen::Index n = g.node_count();
  if (static_cast<Eigen::Index>(rotations.size()) != n)
    throw Error(ErrorCode::LengthMismatch, "one rotation per node required");

  // Normal equations of translation_objective: ∂/∂t_i and ∂/∂t_j of
  // c‖t_i − t_j − u‖² with u = R_j·t̂_ij.
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * n);
  for (const Edge& e : g.edges()) {
    if (!e.active) continue;
    const double c = e.c_fused;
    const Eigen::Index i = 3 * e.i, j = 3 * e.j;
    const Vec3 u = rotations[static_cast<std::size_t>(e.j)] * e.motion.translation;
    normal.block<3, 3>(i, i).diagonal().array() += c;
    normal.block<3, 3>(j, j).diagonal().array() += c;
    normal.block<3, 3>(i, j).diagonal().array() -= c;
    normal.block<3, 3>(j, i).diagonal().array() -= c;
    rhs.segment<3>(i) += c * u;
    rhs.segment<3>(j) -= c * u;
  }

  // The normal matrix is symmetric PSD, so its eigendecomposition gives the pseudoinverse.
  // Eigen 3.4.0's BDCSVD returns wrong solutions for some of these matrices.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::EigenSolverFailure, "symmetric eigensolver did not converge");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-10 * lambda.cwiseAbs().maxCoeff();
  Eigen::VectorXd proj = eig.eigenvectors().transpose() * rhs;
  int rank = 0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) > cutoff) {
      proj(k) /= lambda(k);
      ++rank;
    } else {
      proj(k) = 0.0;
    }
  }
  const Eigen::VectorXd t = eig.eigenvectors() * proj;

  TranslationSyncOutput out;
  out.rank_deficiency = static_cast<int>(3 * n) - rank;
  const Vec3 anchor = t.head<3>();
  out.translations.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) out.translations.push_back(t.segment<3>(3 * k) - anchor);
  out.translations[0] = Vec3::Zero();
  return out;
}

std::vector<Vec3> translation_sync(const PoseGraph& g, std::span<const Rotation3> rotations) {
  return translation_sync_detailed(g, rotations).translations;
}

SyncOutcome transf_sync(const PoseGraph& g, int rounds, const SyncConfig& cfg) {
  if (rounds < 1) throw Error(ErrorCode::InvalidArgument, "at least one synchronization round");
  require_connected(g);
  SyncOutcome out{SyncResult{}, g};
  for (int round = 0; round < rounds; ++round) {
    if (!is_weight_connected(out.graph)) {
      out.result.disconnected = true;
      break;
    }
    const RotationSyncOutput rot = rotation_sync_detailed(out.graph);
    const TranslationSyncOutput trans = translation_sync_detailed(out.graph, rot.rotations);

    SyncResult result;
    result.absolute.reserve(rot.rotations.size());
    for (std::size_t k = 0; k < rot.rotations.size(); ++k)
      result.absolute.push_back({rot.rotations[k], trans.translations[k]});
    result.rotation_eigengap = rot.eigengap;
    result.rotation_spectrum = rot.spectrum;
    result.translation_rank_deficiency = trans.rank_deficiency;
    result.rounds_completed = round + 1;

    std::vector<Edge> edges = out.graph.edges();
    std::vector<double> r(edges.size());
    std::vector<double> active_r;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      r[k] = edge_residual(edges[k], result.absolute);
      if (edges[k].active) active_r.push_back(r[k]);
    }
    const double b = cauchy_scale(active_r, cfg.gamma);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      edges[k].c_global = cauchy_global_confidence(r[k], b);
      edges[k].c_fused = harmonic_fuse(edges[k].c_local, edges[k].c_global, cfg.beta);
    }
    out.graph = out.graph.with_edges(std::move(edges));
    out.result = std::move(result);
  }
  return out;
}

}  // namespace mvreg

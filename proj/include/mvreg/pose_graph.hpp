#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/pairwise.hpp"

namespace mvreg {

using NodeId = int;
/// Unordered node pair, stored with first < second.
using EdgeKey = std::pair<NodeId, NodeId>;

/// Edge (i, j), i < j, carrying the measured i→j motion M̂_ij.
struct Edge {
  NodeId i = 0;
  NodeId j = 0;
  RigidMotion motion;
  double c_local = 1.0;
  double c_global = 1.0;
  double c_fused = 1.0;
  bool active = true;
};

/// Immutable scan graph. Edges are canonical (i < j), unique and sorted.
class PoseGraph {
 public:
  /// Validates node_count ≥ 2, indices, canonical order and uniqueness.
  /// Throws IndexOutOfRange, DuplicateEdge, InvalidArgument.
  PoseGraph(int node_count, std::vector<Edge> edges);

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t active_edge_count() const;

  /// Index into edges() of the unordered pair {a, b}, if present.
  std::optional<std::size_t> find(NodeId a, NodeId b) const;
  /// Measured motion from frame a to frame b; inverted when a > b.
  std::optional<RigidMotion> relative(NodeId a, NodeId b) const;

  /// Copy of this graph with a replaced edge list (same node count).
  PoseGraph with_edges(std::vector<Edge> edges) const { return PoseGraph(node_count_, std::move(edges)); }

 private:
  int node_count_;
  std::vector<Edge> edges_;
};

struct PairwiseEdge {
  NodeId i;
  NodeId j;
  PairwiseResult result;
};

/// c_local from the pairwise result, c_global = 1, c_fused = c_local, all
/// active. A pair given as (j, i) is stored as (i, j) with inverted motion.
PoseGraph build_graph(std::span<const PairwiseEdge> pairwise, int n);

/// b = 1.482·γ·median(|r − median(r)|), floored at 1e-9. Throws EmptyResiduals.
double cauchy_scale(std::span<const double> residuals, double gamma);

/// 1 / (1 + r/b).
double cauchy_global_confidence(double edge_residual, double b);

/// Weighted harmonic mean (1 + β²)·c_g·c_l / (β²·c_g + c_l); 0 if both vanish.
double harmonic_fuse(double c_local, double c_global, double beta);

/// Deactivates edges with c_fused < tau. Never removes edges.
PoseGraph prune_edges(const PoseGraph& g, double tau);

/// Breadth-first reachability over active edges.
bool is_connected(const PoseGraph& g);

/// Same, counting only active edges with c_fused > 0, i.e. the edges that
/// actually enter the synchronization matrices.
bool is_weight_connected(const PoseGraph& g);

/// ‖M̂_ij − M*_ij‖_F on 4×4 homogeneous forms, where M*_ij is the relative
/// motion rebuilt from the absolute poses.
double edge_residual(const Edge& e, std::span<const RigidMotion> absolute);

}  // namespace mvreg

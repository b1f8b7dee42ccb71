#include "mvreg/pose_graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "internal.hpp"

namespace mvreg {

PoseGraph::PoseGraph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ < 2) throw Error(ErrorCode::InvalidArgument, "a pose graph needs at least two nodes");
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= node_count_ || e.j >= node_count_)
      throw Error(ErrorCode::IndexOutOfRange,
                  "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ") outside graph");
    if (e.i >= e.j) throw Error(ErrorCode::InvalidArgument, "edges must be stored with i < j");
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  const auto dup = std::adjacent_find(edges_.begin(), edges_.end(),
                                      [](const Edge& a, const Edge& b) { return a.i == b.i && a.j == b.j; });
  if (dup != edges_.end())
    throw Error(ErrorCode::DuplicateEdge,
                "edge (" + std::to_string(dup->i) + ", " + std::to_string(dup->j) + ") given twice");
}

std::size_t PoseGraph::active_edge_count() const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.active; }));
}

std::optional<std::size_t> PoseGraph::find(NodeId a, NodeId b) const {
  const NodeId i = std::min(a, b), j = std::max(a, b);
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j},
                                   [](const Edge& e, const std::pair<NodeId, NodeId>& key) {
                                     return e.i != key.first ? e.i < key.first : e.j < key.second;
                                   });
  if (it == edges_.end() || it->i != i || it->j != j) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::optional<RigidMotion> PoseGraph::relative(NodeId a, NodeId b) const {
  const auto idx = find(a, b);
  if (!idx) return std::nullopt;
  const RigidMotion& m = edges_[*idx].motion;
  return a < b ? m : invert(m);
}

PoseGraph build_graph(std::span<const PairwiseEdge> pairwise, int n) {
  std::vector<Edge> edges;
  edges.reserve(pairwise.size());
  for (const PairwiseEdge& p : pairwise) {
    if (p.i < 0 || p.j < 0 || p.i >= n || p.j >= n)
      throw Error(ErrorCode::IndexOutOfRange,
                  "pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) + ") outside [0, n)");
    if (p.i == p.j) throw Error(ErrorCode::InvalidArgument, "self-loop on node " + std::to_string(p.i));
    Edge e;
    e.i = std::min(p.i, p.j);
    e.j = std::max(p.i, p.j);
    e.motion = p.i < p.j ? p.result.motion : invert(p.result.motion);
    e.c_local = p.result.local_confidence;
    e.c_global = 1.0;
    e.c_fused = e.c_local;
    e.active = true;
    edges.push_back(e);
  }
  return PoseGraph(n, std::move(edges));
}

double cauchy_scale(std::span<const double> residuals, double gamma) {
  if (residuals.empty()) throw Error(ErrorCode::EmptyResiduals, "no edge residuals");
  return std::max(1.482 * gamma * detail::median_absolute_deviation(residuals), 1e-9);
}

double cauchy_global_confidence(double edge_residual, double b) { return 1.0 / (1.0 + edge_residual / b); }

double harmonic_fuse(double c_local, double c_global, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * c_global + c_local;
  if (den <= 0.0) return 0.0;
  return (1.0 + b2) * c_global * c_local / den;
}

PoseGraph prune_edges(const PoseGraph& g, double tau) {
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges)
    if (e.c_fused < tau) e.active = false;
  return g.with_edges(std::move(edges));
}

namespace {

template <class Usable>
bool reachable_all(const PoseGraph& g, Usable usable) {
  const int n = g.node_count();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : g.edges()) {
    if (!usable(e)) continue;
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      ++reached;
      frontier.push(v);
    }
  }
  return reached == n;
}

}  // namespace

bool is_connected(const PoseGraph& g) {
  return reachable_all(g, [](const Edge& e) { return e.active; });
}

bool is_weight_connected(const PoseGraph& g) {
  return reachable_all(g, [](const Edge& e) { return e.active && e.c_fused > 0.0; });
}

double edge_residual(const Edge& e, std::span<const RigidMotion> absolute) {
  const RigidMotion sync = relative_from_absolute(absolute[static_cast<std::size_t>(e.i)],
                                                  absolute[static_cast<std::size_t>(e.j)]);
  return (e.motion.matrix() - sync.matrix()).norm();
}

}  // namespace mvreg

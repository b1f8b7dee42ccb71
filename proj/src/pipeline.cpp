#include "mvreg/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <string>
#include <thread>

#include "internal.hpp"

namespace mvreg {

namespace {

// Runs body(k) for k in [0, count) over contiguous chunks. Each index owns its
// output slot, so results do not depend on the thread count. The exception of
// the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(count, lo + chunk);
      try {
        for (std::size_t k = lo; k < hi; ++k) body(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool spans_all_nodes(int n, std::span<const EdgeKey> edges) {
  std::vector<int> parent(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) parent[static_cast<std::size_t>(k)] = k;
  auto root = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
    return a;
  };
  int components = n;
  for (const auto& [i, j] : edges) {
    const int a = root(i);
    const int b = root(j);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --components;
    }
  }
  return components == 1;
}

std::vector<EdgeKey> select_pairs(int n, const PipelineConfig& cfg) {
  std::vector<EdgeKey> pairs;
  if (!cfg.connectivity) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
  }
  std::set<EdgeKey> seen;
  for (auto [i, j] : *cfg.connectivity) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw Error(ErrorCode::IndexOutOfRange,
                  "edge (" + std::to_string(i) + ", " + std::to_string(j) + ") outside [0, " + std::to_string(n) + ")");
    if (i == j) throw Error(ErrorCode::InvalidArgument, "self-loop on node " + std::to_string(i));
    if (i > j) std::swap(i, j);
    if (!seen.emplace(i, j).second)
      throw Error(ErrorCode::DuplicateEdge, "edge (" + std::to_string(i) + ", " + std::to_string(j) + ") listed twice");
    pairs.emplace_back(i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  if (!spans_all_nodes(n, pairs)) throw Error(ErrorCode::DisconnectedInput, "connectivity graph is disconnected");
  return pairs;
}

std::optional<ErrorReport> report_absolute(std::span<const RigidMotion> absolute,
                                           std::span<const RigidMotion> ground_truth,
                                           std::span<const EdgeKey> pairs) {
  if (ground_truth.empty()) return std::nullopt;
  return evaluate_absolute(absolute, ground_truth, pairs);
}

// Per-pair state carried between outer iterations.
struct PairState {
  Eigen::VectorXd weights;
  Eigen::VectorXd residuals;
};

struct PairUpdate {
  RigidMotion motion;
  PairState state;
  double local_confidence = 0.0;
};

// One reweighting step of a pair against the synchronized relative motion i → j.
PairUpdate refine_pair(const CorrespondenceSet& original, const RigidMotion& synced, const PairState& prev,
                       const PipelineConfig& cfg) {
  const RigidMotion back = invert(synced);
  CorrespondenceSet aligned = pre_align(original, back);
  const Eigen::VectorXd r0 = residuals(aligned, RigidMotion::identity());
  aligned.weights = robust_reweight(r0, prev.weights, cfg.blend);

  PairUpdate out;
  RigidMotion delta;
  try {
    delta = wls_transform(aligned);
  } catch (const Error&) {
    delta = RigidMotion::identity();  // no support left; keep the synchronized estimate
  }
  out.motion = compose(synced, delta);
  out.state.weights = aligned.weights;
  out.state.residuals = residuals(aligned, delta);
  const double ratio = inlier_ratio(out.state.weights, cfg.w_thresh);
  const std::span<const double> r(out.state.residuals.data(), static_cast<std::size_t>(out.state.residuals.size()));
  out.local_confidence = local_confidence(ratio, detail::median(r), cfg.confidence);
  return out;
}

}  // namespace

PairwiseConfig PipelineConfig::pairwise() const {
  PairwiseConfig p;
  p.temperature = temperature;
  p.inner_irls = inner_irls;
  p.w_thresh = w_thresh;
  p.confidence = confidence;
  return p;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (outer_iterations < 1) fail("outer_iterations must be at least 1");
  if (sync_rounds < 1) fail("sync_rounds must be at least 1");
  if (!(temperature > 0.0)) fail("temperature must be positive");
  if (!(gamma > 0.0)) fail("gamma must be positive");
  if (!(beta > 0.0)) fail("beta must be positive");
  if (inner_irls < 0) fail("inner_irls must be non-negative");
  if (!(tau_p >= 0.0 && tau_p <= 1.0)) fail("tau_p must lie in [0, 1]");
  if (!(blend >= 0.0 && blend <= 1.0)) fail("blend must lie in [0, 1]");
  if (!(w_thresh >= 0.0 && w_thresh <= 1.0)) fail("w_thresh must lie in [0, 1]");
  if (!(confidence.residual_scale > 0.0)) fail("residual_scale must be positive");
  if (threads < 0) fail("threads must be non-negative");
}

std::vector<PairInput> build_pair_inputs(std::span<const PointCloud> clouds, const PipelineConfig& cfg) {
  const int n = static_cast<int>(clouds.size());
  if (n < 3) throw Error(ErrorCode::TooFewClouds, "need at least 3 clouds, got " + std::to_string(n));
  for (int k = 0; k < n; ++k)
    if (!clouds[static_cast<std::size_t>(k)].has_features())
      throw Error(ErrorCode::MissingFeatures, "cloud " + std::to_string(k) + " has no features");
  const std::vector<EdgeKey> keys = select_pairs(n, cfg);
  std::vector<std::optional<CorrespondenceSet>> sets(keys.size());
  parallel_for(keys.size(), cfg.threads, [&](std::size_t k) {
    const auto [i, j] = keys[k];
    sets[k] = build_correspondences(clouds[static_cast<std::size_t>(i)], clouds[static_cast<std::size_t>(j)],
                                    cfg.temperature);
  });
  std::vector<PairInput> out;
  out.reserve(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) out.push_back({keys[k].first, keys[k].second, std::move(*sets[k])});
  return out;
}

void inject_pair_corruptions(std::vector<PairInput>& pairs, const std::map<EdgeKey, RigidMotion>& corruptions) {
  for (PairInput& p : pairs) {
    const auto it = corruptions.find({p.i, p.j});
    if (it != corruptions.end()) p.correspondences.target = apply(it->second, p.correspondences.target);
  }
}

CorrespondenceSet pre_align(const CorrespondenceSet& c, const RigidMotion& m) {
  return CorrespondenceSet(c.source, apply(m, c.target), c.weights, c.residuals);
}

MultiviewResult run_multiview_from_pairs(int n, std::span<const PairInput> pairs, const PipelineConfig& cfg,
                                         std::span<const RigidMotion> ground_truth) {
  cfg.validate();
  if (n < 3) throw Error(ErrorCode::TooFewClouds, "need at least 3 clouds, got " + std::to_string(n));
  if (!ground_truth.empty() && ground_truth.size() != static_cast<std::size_t>(n))
    throw Error(ErrorCode::LengthMismatch, "ground truth has " + std::to_string(ground_truth.size()) +
                                               " poses for " + std::to_string(n) + " clouds");
  std::vector<EdgeKey> keys;
  for (const PairInput& p : pairs) {
    if (p.i < 0 || p.j < 0 || p.i >= n || p.j >= n)
      throw Error(ErrorCode::IndexOutOfRange, "pair outside [0, " + std::to_string(n) + ")");
    if (p.i >= p.j) throw Error(ErrorCode::InvalidArgument, "pairs must satisfy i < j");
    keys.emplace_back(p.i, p.j);
  }
  if (!spans_all_nodes(n, keys)) throw Error(ErrorCode::DisconnectedInput, "registered pairs do not span all clouds");

  // Initial pairwise registration.
  const PairwiseConfig pcfg = cfg.pairwise();
  std::vector<PairwiseEdge> initial(pairs.size());
  parallel_for(pairs.size(), cfg.threads, [&](std::size_t k) {
    initial[k] = {pairs[k].i, pairs[k].j, register_correspondences(pairs[k].correspondences, pcfg)};
  });

  std::vector<PairState> state(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) state[k] = {initial[k].result.weights, initial[k].result.residuals};

  PoseGraph graph = build_graph(initial, n);
  // build_graph keeps the input order for i < j pairs, but look edges up by key to stay safe.
  std::vector<std::size_t> edge_of(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) edge_of[k] = *graph.find(pairs[k].i, pairs[k].j);

  PipelineTrace trace;
  if (!ground_truth.empty()) {
    std::vector<RelativeEstimate> rel;
    for (const PairwiseEdge& e : initial) rel.push_back({e.i, e.j, e.result.motion});
    trace.pairwise = evaluate_relative(rel, ground_truth);
  }

  std::optional<SyncResult> last_valid;
  const SyncConfig scfg = cfg.sync();
  for (int k = 1; k <= cfg.outer_iterations; ++k) {
    IterationTrace it;
    it.iteration = k;
    SyncOutcome outcome{SyncResult{}, graph};
    try {
      outcome = transf_sync(graph, cfg.sync_rounds, scfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DisconnectedGraph || !last_valid) throw;
      it.active_edges = graph.active_edge_count();
      it.disconnected = true;
      trace.iterations.push_back(std::move(it));
      last_valid->disconnected = true;
      break;
    }
    last_valid = outcome.result;
    it.errors = report_absolute(outcome.result.absolute, ground_truth, keys);

    // Feed the synchronized relatives back into every active pair.
    std::vector<Edge> edges = outcome.graph.edges();
    std::vector<std::optional<PairUpdate>> updates(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t p) {
      const Edge& e = edges[edge_of[p]];
      if (!e.active) return;
      const RigidMotion synced = relative_from_absolute(outcome.result.absolute[static_cast<std::size_t>(e.i)],
                                                        outcome.result.absolute[static_cast<std::size_t>(e.j)]);
      updates[p] = refine_pair(pairs[p].correspondences, synced, state[p], cfg);
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (!updates[p]) continue;
      Edge& e = edges[edge_of[p]];
      e.motion = updates[p]->motion;
      e.c_local = updates[p]->local_confidence;
      e.c_fused = k == 1 ? e.c_local : harmonic_fuse(e.c_local, e.c_global, cfg.beta);
      state[p] = std::move(updates[p]->state);
    }
    graph = prune_edges(graph.with_edges(std::move(edges)), cfg.tau_p);
    it.active_edges = graph.active_edge_count();
    if (!is_connected(graph)) {
      it.disconnected = true;
      trace.iterations.push_back(std::move(it));
      last_valid->disconnected = true;
      break;
    }
    trace.iterations.push_back(std::move(it));
  }
  return {std::move(*last_valid), std::move(trace), std::move(graph), std::move(initial)};
}

MultiviewResult run_multiview(std::span<const PointCloud> clouds, const PipelineConfig& cfg,
                              std::span<const RigidMotion> ground_truth) {
  cfg.validate();
  const std::vector<PairInput> pairs = build_pair_inputs(clouds, cfg);
  return run_multiview_from_pairs(static_cast<int>(clouds.size()), pairs, cfg, ground_truth);
}

}  // namespace mvreg

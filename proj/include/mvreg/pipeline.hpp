#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mvreg/eval.hpp"
#include "mvreg/geometry.hpp"
#include "mvreg/pairwise.hpp"
#include "mvreg/pose_graph.hpp"
#include "mvreg/synchronization.hpp"

namespace mvreg {

struct PipelineConfig {
  int outer_iterations = 4;
  int sync_rounds = 4;
  double tau_p = 0.85;
  double temperature = 0.02;
  double gamma = 3.0;
  double beta = 1.0;
  double w_thresh = 0.5;
  int inner_irls = 5;
  /// Weight given to the fresh Cauchy weights when blending with the previous iteration's.
  double blend = 0.7;
  LocalConfidenceParams confidence;
  /// Pairs to register; all pairs when absent.
  std::optional<std::vector<EdgeKey>> connectivity;
  /// Worker threads for pair-level work; 0 picks the hardware concurrency.
  int threads = 0;

  PairwiseConfig pairwise() const;
  SyncConfig sync() const { return {gamma, beta}; }
  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

struct IterationTrace {
  int iteration = 0;
  std::size_t active_edges = 0;
  bool disconnected = false;
  std::optional<ErrorReport> errors;
};

struct PipelineTrace {
  /// Errors of the initial pairwise estimates, when ground truth is given.
  std::optional<ErrorReport> pairwise;
  std::vector<IterationTrace> iterations;
};

/// Soft correspondences of one registered pair, source from cloud i and target from cloud j.
struct PairInput {
  NodeId i;
  NodeId j;
  CorrespondenceSet correspondences;
};

/// Pairs selected by cfg.connectivity (or all i < j) with their soft correspondences.
/// Throws TooFewClouds, DisconnectedInput, IndexOutOfRange, DuplicateEdge, MissingFeatures.
std::vector<PairInput> build_pair_inputs(std::span<const PointCloud> clouds, const PipelineConfig& cfg);

/// Replaces the targets of each listed pair by corruption(target).
void inject_pair_corruptions(std::vector<PairInput>& pairs, const std::map<EdgeKey, RigidMotion>& corruptions);

/// Targets mapped through m; weights and residuals carried over.
CorrespondenceSet pre_align(const CorrespondenceSet& c, const RigidMotion& m);

struct MultiviewResult {
  SyncResult sync;
  PipelineTrace trace;
  /// Graph after the last completed iteration.
  PoseGraph graph;
  /// Initial pairwise estimates, one per registered pair.
  std::vector<PairwiseEdge> pairwise;
};

/// Pairwise registration of every selected pair followed by the reweighted sync loop.
/// Ground truth, when given, must hold one pose per cloud and is used for the trace only.
MultiviewResult run_multiview(std::span<const PointCloud> clouds, const PipelineConfig& cfg,
                              std::span<const RigidMotion> ground_truth = {});

/// Same loop on precomputed correspondences (pairs with i < j).
MultiviewResult run_multiview_from_pairs(int n, std::span<const PairInput> pairs, const PipelineConfig& cfg,
                                         std::span<const RigidMotion> ground_truth = {});

}  // namespace mvreg

#include "mvreg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "internal.hpp"

namespace mvreg {

double angular_error(const Rotation3& a, const Rotation3& b) { return rad2deg(geodesic_angle(a, b)); }

std::vector<double> ecdf(std::span<const double> errors, std::span<const double> thresholds) {
  if (errors.empty()) throw Error(ErrorCode::EmptyErrors, "no errors to summarize");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw Error(ErrorCode::InvalidArgument, "ECDF thresholds must be ascending");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back(static_cast<double>(below) / static_cast<double>(sorted.size()));
  }
  return out;
}

double registration_rmse(const RecallPair& pair) {
  if (pair.points.rows() == 0) throw Error(ErrorCode::EmptyPairs, "pair without ground-truth correspondences");
  const Points est = apply(pair.estimate, pair.points);
  const Points gt = apply(pair.ground_truth, pair.points);
  return std::sqrt((est - gt).rowwise().squaredNorm().mean());
}

double registration_recall(std::span<const RecallPair> pairs, double rmse_thresh) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPairs, "no pairs to evaluate");
  const auto ok = std::count_if(pairs.begin(), pairs.end(),
                                [&](const RecallPair& p) { return registration_rmse(p) < rmse_thresh; });
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

SyncPairError sync_pair_error(std::span<const RigidMotion> estimate, std::span<const RigidMotion> ground_truth) {
  if (estimate.size() != ground_truth.size())
    throw Error(ErrorCode::LengthMismatch, "estimate has " + std::to_string(estimate.size()) +
                                               " poses, ground truth " + std::to_string(ground_truth.size()));
  SyncPairError out;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    for (std::size_t j = i + 1; j < estimate.size(); ++j) {
      const RigidMotion e = relative_from_absolute(estimate[i], estimate[j]);
      const RigidMotion g = relative_from_absolute(ground_truth[i], ground_truth[j]);
      out.rotation += (e.rotation.matrix() - g.rotation.matrix()).norm();
      out.translation += (e.translation - g.translation).norm();
      ++pairs;
    }
  }
  if (pairs > 0) {
    out.rotation /= static_cast<double>(pairs);
    out.translation /= static_cast<double>(pairs);
  }
  return out;
}

SyncPairError sync_pair_error(const SyncResult& estimate, std::span<const RigidMotion> ground_truth) {
  return sync_pair_error(estimate.absolute, ground_truth);
}

std::vector<RelativeEstimate> relatives_from_absolute(std::span<const RigidMotion> absolute,
                                                      std::span<const EdgeKey> pairs) {
  std::vector<RelativeEstimate> out;
  const auto n = static_cast<NodeId>(absolute.size());
  auto push = [&](NodeId i, NodeId j) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw Error(ErrorCode::IndexOutOfRange, "pair outside pose list");
    out.push_back({i, j, relative_from_absolute(absolute[static_cast<std::size_t>(i)],
                                                absolute[static_cast<std::size_t>(j)])});
  };
  if (pairs.empty()) {
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j) push(i, j);
  } else {
    for (const auto& [i, j] : pairs) push(i, j);
  }
  return out;
}

ErrorReport evaluate_relative(std::span<const RelativeEstimate> estimates, std::span<const RigidMotion> ground_truth,
                              std::span<const double> rotation_thresholds_deg,
                              std::span<const double> translation_thresholds_m) {
  if (estimates.empty()) throw Error(ErrorCode::EmptyErrors, "no relative estimates");
  ErrorReport r;
  const auto n = static_cast<NodeId>(ground_truth.size());
  for (const RelativeEstimate& e : estimates) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
      throw Error(ErrorCode::IndexOutOfRange, "estimate refers to a node without ground truth");
    const RigidMotion gt = relative_from_absolute(ground_truth[static_cast<std::size_t>(e.i)],
                                                  ground_truth[static_cast<std::size_t>(e.j)]);
    r.rotation_errors_deg.push_back(angular_error(e.motion.rotation, gt.rotation));
    r.translation_errors_m.push_back((e.motion.translation - gt.translation).norm());
  }
  r.rotation_thresholds_deg.assign(rotation_thresholds_deg.begin(), rotation_thresholds_deg.end());
  r.translation_thresholds_m.assign(translation_thresholds_m.begin(), translation_thresholds_m.end());
  r.ecdf_rotation = ecdf(r.rotation_errors_deg, rotation_thresholds_deg);
  r.ecdf_translation = ecdf(r.translation_errors_m, translation_thresholds_m);
  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  r.mean_rotation_deg = mean(r.rotation_errors_deg);
  r.median_rotation_deg = detail::median(r.rotation_errors_deg);
  r.mean_translation_m = mean(r.translation_errors_m);
  r.median_translation_m = detail::median(r.translation_errors_m);
  return r;
}

ErrorReport evaluate_absolute(std::span<const RigidMotion> estimate, std::span<const RigidMotion> ground_truth,
                              std::span<const EdgeKey> pairs, std::span<const double> rotation_thresholds_deg,
                              std::span<const double> translation_thresholds_m) {
  if (estimate.size() != ground_truth.size())
    throw Error(ErrorCode::LengthMismatch, "estimate has " + std::to_string(estimate.size()) +
                                               " poses, ground truth " + std::to_string(ground_truth.size()));
  const auto rel = relatives_from_absolute(estimate, pairs);
  return evaluate_relative(rel, ground_truth, rotation_thresholds_deg, translation_thresholds_m);
}

std::string ecdf_table_header(const ErrorReport& report) {
  std::string out = "Method";
  for (double t : report.rotation_thresholds_deg) out += " & " + detail::format_short(t) + "°";
  out += " & Mean/Med.";
  for (double t : report.translation_thresholds_m) out += " & " + detail::format_short(t);
  out += " & Mean/Med. \\\\";
  return out;
}

std::string ecdf_table_row(const ErrorReport& report, std::string_view label) {
  std::string out(label);
  for (double v : report.ecdf_rotation) out += " & " + detail::format_fixed(100.0 * v, 1);
  out += " & " + detail::format_fixed(report.mean_rotation_deg, 1) + "°/" +
         detail::format_fixed(report.median_rotation_deg, 1) + "°";
  for (double v : report.ecdf_translation) out += " & " + detail::format_fixed(100.0 * v, 1);
  out += " & " + detail::format_fixed(report.mean_translation_m, 2) + "/" +
         detail::format_fixed(report.median_translation_m, 2) + " \\\\";
  return out;
}

}  // namespace mvreg

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mvreg/eval.hpp"
#include "mvreg/geometry.hpp"
#include "mvreg/pose_graph.hpp"
#include "mvreg/synth.hpp"

namespace mvreg {

namespace fs = std::filesystem;

/// Vertex positions of an ascii or binary_little_endian PLY file. Unknown
/// vertex properties and elements after the vertices are skipped.
/// Throws IoError, MalformedHeader, UnsupportedFormat, TruncatedPayload, TrailingData.
Points read_ply_points(const fs::path& path);
PointCloud read_ply(const fs::path& path);
void write_ply(const fs::path& path, const Points& points, bool binary = true);

/// "FEAT", u32 N, u32 D, u32 reserved (0), then N·D float32, all little-endian.
Features read_features(const fs::path& path);
/// Stores features as float32.
void write_features(const fs::path& path, const Features& features);

struct TrajectoryEntry {
  int i = 0;
  int j = 0;
  int n = 0;
  Mat4 matrix = Mat4::Identity();
};

struct TrajectoryFile {
  std::vector<TrajectoryEntry> entries;
  /// Non-fatal problems, e.g. rotation blocks off SO(3) by more than 1e-6.
  std::vector<std::string> warnings;
};

/// Throws IoError, MalformedEntry.
TrajectoryFile read_trajectory(const fs::path& path);
TrajectoryFile parse_trajectory(std::string_view text);
/// Writes 17 significant digits per value.
void write_trajectory(const fs::path& path, std::span<const TrajectoryEntry> entries);
std::string format_trajectory(std::span<const TrajectoryEntry> entries);

/// Throws NonRigidMatrix if the rotation block is off SO(3) by more than 1e-6.
RigidMotion entry_motion(const TrajectoryEntry& entry);
TrajectoryEntry make_entry(int i, int j, int n, const RigidMotion& m);

/// Absolute poses are stored as entries "k k n".
std::vector<TrajectoryEntry> absolute_entries(std::span<const RigidMotion> poses);
bool is_absolute(std::span<const TrajectoryEntry> entries);
/// Requires entries "k k n" for k = 0…n−1 in order. Throws MalformedEntry.
std::vector<RigidMotion> absolute_poses(std::span<const TrajectoryEntry> entries);
std::vector<RelativeEstimate> relative_estimates(std::span<const TrajectoryEntry> entries);

/// One "i j" pair per line; '#' starts a comment. Throws IoError, MalformedEntry.
std::vector<EdgeKey> read_edge_list(const fs::path& path);

/// Keeps one point per occupied cell: the centroid of its points (and the mean of their features).
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Clouds scan_*.ply with features scan_*.feat, ordered by file name. Throws IoError.
std::vector<PointCloud> load_scan_directory(const fs::path& dir);

/// Corruption motions of outlier pairs, stored as pairwise trajectory entries.
std::map<EdgeKey, RigidMotion> read_corruptions(const fs::path& path);

/// Writes scan_XXX.ply/.feat, gt.log and outliers.log into `dir`.
void write_scene(const fs::path& dir, const SyntheticScene& scene);

}  // namespace mvreg

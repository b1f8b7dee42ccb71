#include "mvreg/synth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace mvreg {

namespace {

struct Face {
  Vec3 origin;
  Vec3 u;
  Vec3 v;
  double area() const { return u.cross(v).norm(); }
};

void add_box(std::vector<Face>& faces, const Vec3& center, const Vec3& half) {
  const Vec3 ex(2.0 * half.x(), 0.0, 0.0);
  const Vec3 ey(0.0, 2.0 * half.y(), 0.0);
  const Vec3 ez(0.0, 0.0, 2.0 * half.z());
  const Vec3 lo = center - half;
  const Vec3 hi = center + half;
  faces.push_back({lo, ey, ez});
  faces.push_back({Vec3(hi.x(), lo.y(), lo.z()), ey, ez});
  faces.push_back({lo, ex, ez});
  faces.push_back({Vec3(lo.x(), hi.y(), lo.z()), ex, ez});
  faces.push_back({lo, ex, ey});
  faces.push_back({Vec3(lo.x(), lo.y(), hi.z()), ex, ey});
}

Points sample_base_shape(int count, std::mt19937_64& rng) {
  std::vector<Face> faces;
  add_box(faces, Vec3::Zero(), Vec3(1.0, 0.8, 0.6));
  // Desk standing on the floor.
  add_box(faces, Vec3(0.35, -0.2, -0.35), Vec3(0.4, 0.25, 0.25));
  std::vector<double> areas;
  for (const Face& f : faces) areas.push_back(f.area());
  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Points out(count, 3);
  for (int k = 0; k < count; ++k) {
    const Face& f = faces[static_cast<std::size_t>(pick(rng))];
    const double a = unit(rng);
    const double b = unit(rng);
    out.row(k) = (f.origin + a * f.u + b * f.v).transpose();
  }
  return out;
}

RigidMotion random_corruption(std::mt19937_64& rng, double min_angle) {
  std::uniform_real_distribution<double> angle(min_angle, kPi);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
  while (axis.norm() < 1e-6) axis = Vec3(gauss(rng), gauss(rng), gauss(rng));
  RigidMotion c;
  c.rotation = Rotation3::about_axis(axis, angle(rng));
  c.translation = Vec3(shift(rng), shift(rng), shift(rng));
  return c;
}

}  // namespace

Rotation3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (q.norm() < 1e-6);
  q.normalize();
  return project_to_so3(q.toRotationMatrix());
}

SyntheticScene generate_scene(const SceneConfig& cfg) {
  if (cfg.n_scans < 3) throw Error(ErrorCode::InvalidArgument, "a scene needs at least 3 scans");
  if (cfg.pts_per_scan < 3) throw Error(ErrorCode::InvalidArgument, "pts_per_scan must be at least 3");
  if (!(cfg.outlier_edge_fraction >= 0.0 && cfg.outlier_edge_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "outlier_edge_fraction must lie in [0, 1]");
  if (!(cfg.overlap > 0.0 && cfg.overlap <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "overlap must lie in (0, 1]");
  if (!(cfg.noise_sigma >= 0.0) || !(cfg.descriptor_noise >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "noise levels must be non-negative");

  std::mt19937_64 rng(cfg.seed);
  const int base_count = static_cast<int>(std::ceil(cfg.pts_per_scan / cfg.overlap));
  const Points base = sample_base_shape(base_count, rng);

  SyntheticScene scene;
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  for (int s = 0; s < cfg.n_scans; ++s) {
    RigidMotion gt;
    gt.rotation = random_rotation(rng);
    gt.translation = Vec3(shift(rng), shift(rng), shift(rng));
    scene.ground_truth.push_back(gt);
  }

  std::normal_distribution<double> point_noise(0.0, 1.0);
  std::vector<int> order(static_cast<std::size_t>(base_count));
  for (int s = 0; s < cfg.n_scans; ++s) {
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first pts_per_scan entries form the visible subset.
    for (int k = 0; k < cfg.pts_per_scan; ++k) {
      std::uniform_int_distribution<int> pick(k, base_count - 1);
      std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
    }
    const RigidMotion to_local = invert(scene.ground_truth[static_cast<std::size_t>(s)]);
    Points pts(cfg.pts_per_scan, 3);
    Features feats(cfg.pts_per_scan, 3);
    for (int k = 0; k < cfg.pts_per_scan; ++k) {
      const Vec3 world = base.row(order[static_cast<std::size_t>(k)]).transpose();
      Vec3 local = to_local(world);
      Vec3 desc = cfg.feature_scale * world;
      for (int d = 0; d < 3; ++d) {
        local[d] += cfg.noise_sigma * point_noise(rng);
        desc[d] += cfg.descriptor_noise * point_noise(rng);
      }
      pts.row(k) = local.transpose();
      feats.row(k) = desc.transpose();
    }
    scene.clouds.emplace_back(std::move(pts), std::move(feats));
  }

  std::vector<EdgeKey> pairs;
  for (int i = 0; i < cfg.n_scans; ++i)
    for (int j = i + 1; j < cfg.n_scans; ++j) pairs.emplace_back(i, j);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto outliers =
      static_cast<std::size_t>(std::llround(cfg.outlier_edge_fraction * static_cast<double>(pairs.size())));
  const double min_angle = deg2rad(cfg.min_outlier_angle_deg);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (k < outliers) {
      scene.edge_labels[pairs[k]] = EdgeLabel::Outlier;
      scene.corruptions[pairs[k]] = random_corruption(rng, min_angle);
    } else {
      scene.edge_labels[pairs[k]] = EdgeLabel::Inlier;
    }
  }
  return scene;
}

SyntheticScene generate_scene(int n_scans, int pts_per_scan, double noise_sigma, double outlier_edge_fraction,
                              std::uint64_t seed) {
  SceneConfig cfg;
  cfg.n_scans = n_scans;
  cfg.pts_per_scan = pts_per_scan;
  cfg.noise_sigma = noise_sigma;
  cfg.outlier_edge_fraction = outlier_edge_fraction;
  cfg.seed = seed;
  return generate_scene(cfg);
}

}  // namespace mvreg

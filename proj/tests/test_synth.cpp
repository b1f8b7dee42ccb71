#include <gtest/gtest.h>

#include "mvreg/pairwise.hpp"
#include "mvreg/synth.hpp"
#include "support.hpp"

namespace mvreg {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

RigidMotion gt_relative(const SyntheticScene& s, int i, int j) {
  return relative_from_absolute(s.ground_truth[static_cast<std::size_t>(i)], s.ground_truth[static_cast<std::size_t>(j)]);
}

TEST(Synth, DeterministicUnderSeed) {
  SceneConfig cfg;
  cfg.n_scans = 5;
  cfg.pts_per_scan = 300;
  cfg.outlier_edge_fraction = 0.3;
  cfg.seed = 42;
  const SyntheticScene a = generate_scene(cfg);
  const SyntheticScene b = generate_scene(cfg);
  ASSERT_EQ(a.clouds.size(), 5u);
  for (std::size_t k = 0; k < a.clouds.size(); ++k) {
    EXPECT_EQ(a.clouds[k].points(), b.clouds[k].points());
    EXPECT_EQ(a.clouds[k].features(), b.clouds[k].features());
    EXPECT_EQ(a.ground_truth[k].matrix(), b.ground_truth[k].matrix());
  }
  EXPECT_EQ(a.edge_labels, b.edge_labels);
  cfg.seed = 43;
  EXPECT_NE(generate_scene(cfg).clouds[0].points(), a.clouds[0].points());
}

TEST(Synth, LabelsAndOutlierCount) {
  const SyntheticScene s = generate_scene(10, 100, 0.01, 0.2, 7);
  EXPECT_EQ(s.edge_labels.size(), 45u);
  int outliers = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) {
      ASSERT_TRUE(s.edge_labels.count({i, j}));
      if (s.edge_labels.at({i, j}) == EdgeLabel::Outlier) {
        ++outliers;
        ASSERT_TRUE(s.corruptions.count({i, j}));
        EXPECT_GE(rad2deg(geodesic_angle(s.corruptions.at({i, j}).rotation, Rotation3::identity())), 30.0 - 1e-9);
      }
    }
  EXPECT_EQ(outliers, 9);
  EXPECT_EQ(s.corruptions.size(), 9u);
  for (const RigidMotion& m : s.ground_truth) EXPECT_LT(so3_violation(m.rotation.matrix()), 1e-9);
}

TEST(Synth, CloudsHaveExpectedShape) {
  SceneConfig cfg;
  cfg.n_scans = 4;
  cfg.pts_per_scan = 500;
  cfg.noise_sigma = 0.0;
  cfg.descriptor_noise = 0.0;
  const SyntheticScene s = generate_scene(cfg);
  for (std::size_t k = 0; k < s.clouds.size(); ++k) {
    EXPECT_EQ(s.clouds[k].size(), 500);
    EXPECT_EQ(s.clouds[k].feature_dim(), 3);
    // Noise-free descriptors are scaled world coordinates of the scanned points.
    const Points world = apply(s.ground_truth[k], s.clouds[k].points());
    EXPECT_LT((cfg.feature_scale * world - s.clouds[k].features()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(world.cwiseAbs().colwise().maxCoeff()(0), 1.0 + 1e-9);
  }
}

TEST(Synth, NoiseFreeFullOverlapRegistersExactly) {
  SceneConfig cfg;
  cfg.n_scans = 4;
  cfg.pts_per_scan = 400;
  cfg.noise_sigma = 0.0;
  cfg.descriptor_noise = 0.0;
  cfg.overlap = 1.0;
  cfg.seed = 3;
  const SyntheticScene s = generate_scene(cfg);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const PairwiseResult r = register_pair(s.clouds[static_cast<std::size_t>(i)], s.clouds[static_cast<std::size_t>(j)]);
      EXPECT_LT(rad2deg(geodesic_angle(r.motion.rotation, gt_relative(s, i, j).rotation)), 1e-6);
      EXPECT_LT((r.motion.translation - gt_relative(s, i, j).translation).norm(), 1e-8);
    }
}

TEST(Synth, DefaultOverlapRegistersClosely) {
  const SyntheticScene s = generate_scene(4, 1024, 0.01, 0.0, 5);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const PairwiseResult r = register_pair(s.clouds[static_cast<std::size_t>(i)], s.clouds[static_cast<std::size_t>(j)]);
      EXPECT_LT(rad2deg(geodesic_angle(r.motion.rotation, gt_relative(s, i, j).rotation)), 10.0);
    }
}

TEST(Synth, TripletsAreConsistent) {
  const SyntheticScene s = generate_scene(6, 50, 0.0, 0.3, 11);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      for (int k = j + 1; k < 6; ++k) {
        if (s.edge_labels.at({i, j}) == EdgeLabel::Outlier || s.edge_labels.at({j, k}) == EdgeLabel::Outlier ||
            s.edge_labels.at({i, k}) == EdgeLabel::Outlier)
          continue;
        const RigidMotion loop = compose(invert(gt_relative(s, i, k)), compose(gt_relative(s, j, k), gt_relative(s, i, j)));
        EXPECT_LT((loop.matrix() - Mat4::Identity()).norm(), 1e-9);
      }
}

TEST(Synth, AllOutliers) {
  const SyntheticScene s = generate_scene(3, 50, 0.01, 1.0, 1);
  for (const auto& [key, label] : s.edge_labels) EXPECT_EQ(label, EdgeLabel::Outlier);
  EXPECT_EQ(s.corruptions.size(), 3u);
}

TEST(Synth, InvalidArguments) {
  EXPECT_EQ(code_of([] { generate_scene(2, 100, 0.01, 0.0, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { generate_scene(3, 100, 0.01, 1.5, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { generate_scene(3, 100, -0.1, 0.0, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { generate_scene(3, 0, 0.01, 0.0, 0); }), ErrorCode::InvalidArgument);
  SceneConfig cfg;
  cfg.overlap = 0.0;
  EXPECT_EQ(code_of([&] { generate_scene(cfg); }), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace mvreg

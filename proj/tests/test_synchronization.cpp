#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <random>

#include "mvreg/synchronization.hpp"
#include "support.hpp"

namespace mvreg {
namespace {

using testing::random_motion;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

std::vector<RigidMotion> random_poses(std::mt19937_64& rng, int n) {
  std::vector<RigidMotion> out;
  for (int k = 0; k < n; ++k) out.push_back(random_motion(rng, 2.0));
  return out;
}

RigidMotion perturb(std::mt19937_64& rng, const RigidMotion& m, double angle, double shift) {
  std::normal_distribution<double> g(0.0, 1.0);
  const RigidMotion noise{Rotation3::about_axis(testing::random_unit(rng), angle * g(rng)),
                          shift * Vec3(g(rng), g(rng), g(rng))};
  return compose(noise, m);
}

// Edges between all pairs (or with probability `density`) measured from the poses.
PoseGraph graph_from(std::mt19937_64& rng, const std::vector<RigidMotion>& poses, double angle_noise,
                     double shift_noise, double density = 1.0, bool random_weights = false) {
  const int n = static_cast<int>(poses.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // Keep a spanning chain so the graph stays connected.
      if (j != i + 1 && u(rng) > density) continue;
      Edge e;
      e.i = i;
      e.j = j;
      e.motion = relative_from_absolute(poses[static_cast<std::size_t>(i)], poses[static_cast<std::size_t>(j)]);
      if (angle_noise > 0.0 || shift_noise > 0.0) e.motion = perturb(rng, e.motion, angle_noise, shift_noise);
      e.c_fused = random_weights ? 0.1 + 0.9 * u(rng) : 1.0;
      edges.push_back(e);
    }
  }
  return PoseGraph(n, edges);
}

double max_relative_rotation_error(const std::vector<Rotation3>& rot, const std::vector<RigidMotion>& gt) {
  double worst = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const Rotation3 est = rot[j].inverse() * rot[i];
      const Rotation3 ref = gt[j].rotation.inverse() * gt[i].rotation;
      worst = std::max(worst, geodesic_angle(est, ref));
    }
  return worst;
}

TEST(RotationLaplacian, QuadraticFormAndSymmetry) {
  std::mt19937_64 rng(1);
  const auto poses = random_poses(rng, 7);
  const PoseGraph g = graph_from(rng, poses, 0.1, 0.0, 0.6, true);
  const Eigen::MatrixXd lap = rotation_laplacian(g);
  EXPECT_LT((lap - lap.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
  // tr(YᵀLY) equals Σ c‖Y_i − R̂_ijᵀ·Y_j‖² for any stacked Y.
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd y = Eigen::MatrixXd::Random(21, 3);
    double expected = 0.0;
    for (const Edge& e : g.edges())
      expected += e.c_fused * (y.block<3, 3>(3 * e.i, 0) - e.motion.rotation.matrix().transpose() * y.block<3, 3>(3 * e.j, 0))
                                  .squaredNorm();
    EXPECT_NEAR((y.transpose() * lap * y).trace(), expected, 1e-10 * std::max(1.0, expected));
  }
}

TEST(RotationSync, TwoNodes) {
  Edge e;
  e.i = 0;
  e.j = 1;
  const auto rot = rotation_sync(PoseGraph(2, {e}));
  EXPECT_LT((rot[0].matrix() - Mat3::Identity()).norm(), 1e-12);
  EXPECT_LT((rot[1].matrix() - Mat3::Identity()).norm(), 1e-12);
}

TEST(RotationSync, NoiseFreeFullGraph) {
  std::mt19937_64 rng(2);
  for (int n : {3, 5, 10, 25}) {
    const auto poses = random_poses(rng, n);
    const PoseGraph g = graph_from(rng, poses, 0.0, 0.0, 1.0, true);
    const RotationSyncOutput out = rotation_sync_detailed(g);
    EXPECT_EQ(out.rotations[0].matrix(), Mat3::Identity());
    EXPECT_LT(max_relative_rotation_error(out.rotations, poses), 1e-6);
    for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(out.spectrum[k]), 1e-9 * out.spectrum[3]);
    for (const Rotation3& r : out.rotations) EXPECT_LT(so3_violation(r.matrix()), 1e-9);
  }
}

TEST(RotationSync, ZeroWeightEdgeIsIgnored) {
  std::mt19937_64 rng(3);
  const auto poses = random_poses(rng, 6);
  const PoseGraph clean = graph_from(rng, poses, 0.05, 0.0, 1.0, true);
  std::vector<Edge> edges = clean.edges();
  edges[4].motion = compose(random_motion(rng), edges[4].motion);
  edges[4].c_fused = 0.0;
  std::vector<Edge> removed = edges;
  removed.erase(removed.begin() + 4);
  const auto a = rotation_sync(PoseGraph(6, edges));
  const auto b = rotation_sync(PoseGraph(6, removed));
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LT((a[k].matrix() - b[k].matrix()).norm(), 1e-9);
}

TEST(RotationSync, ConfidenceScaleInvariance) {
  std::mt19937_64 rng(4);
  const auto poses = random_poses(rng, 8);
  const PoseGraph g = graph_from(rng, poses, 0.1, 0.0, 0.7, true);
  std::vector<Edge> scaled = g.edges();
  for (Edge& e : scaled) e.c_fused *= 37.5;
  const auto a = rotation_sync(g);
  const auto b = rotation_sync(PoseGraph(8, scaled));
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LT((a[k].matrix() - b[k].matrix()).norm(), 1e-9);
}

TEST(RotationSync, NoisyGraphCloseToTruth) {
  std::mt19937_64 rng(5);
  const auto poses = random_poses(rng, 12);
  const PoseGraph g = graph_from(rng, poses, deg2rad(1.0), 0.0);
  EXPECT_LT(rad2deg(max_relative_rotation_error(rotation_sync(g), poses)), 2.0);
}

TEST(RotationSync, DisconnectedGraph) {
  Edge a;
  a.i = 0;
  a.j = 1;
  Edge b;
  b.i = 2;
  b.j = 3;
  EXPECT_EQ(code_of([&] { rotation_sync(PoseGraph(4, {a, b})); }), ErrorCode::DisconnectedGraph);
  EXPECT_EQ(code_of([&] { translation_sync(PoseGraph(4, {a, b}), std::vector<Rotation3>(4)); }),
            ErrorCode::DisconnectedGraph);
}

// Dense weighted least squares with t₀ = 0 solved by QR, as an oracle.
std::vector<Vec3> translation_oracle(const PoseGraph& g, const std::vector<Rotation3>& rot) {
  const int n = g.node_count();
  std::vector<const Edge*> active;
  for (const Edge& e : g.edges())
    if (e.active && e.c_fused > 0.0) active.push_back(&e);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * static_cast<Eigen::Index>(active.size()), 3 * (n - 1));
  Eigen::VectorXd y(3 * static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Edge& e = *active[k];
    const double s = std::sqrt(e.c_fused);
    const auto row = 3 * static_cast<Eigen::Index>(k);
    if (e.i > 0) jac.block<3, 3>(row, 3 * (e.i - 1)) += s * Mat3::Identity();
    if (e.j > 0) jac.block<3, 3>(row, 3 * (e.j - 1)) -= s * Mat3::Identity();
    y.segment<3>(row) = s * (rot[static_cast<std::size_t>(e.j)] * e.motion.translation);
  }
  const Eigen::VectorXd t = jac.colPivHouseholderQr().solve(y);
  std::vector<Vec3> out{Vec3::Zero()};
  for (int k = 1; k < n; ++k) out.push_back(t.segment<3>(3 * (k - 1)));
  return out;
}

TEST(TranslationSync, ConsistentGraphsAreExact) {
  std::mt19937_64 rng(6);
  // Identity rotations.
  std::vector<RigidMotion> flat;
  for (int k = 0; k < 6; ++k) flat.push_back({Rotation3::identity(), Vec3::Random()});
  const PoseGraph gf = graph_from(rng, flat, 0.0, 0.0, 0.5);
  std::vector<Rotation3> ident(6);
  const auto tf = translation_sync(gf, ident);
  for (const Edge& e : gf.edges())
    EXPECT_LT((tf[static_cast<std::size_t>(e.i)] - tf[static_cast<std::size_t>(e.j)] - e.motion.translation).norm(), 1e-9);

  const auto poses = random_poses(rng, 9);
  const PoseGraph g = graph_from(rng, poses, 0.0, 0.0, 0.8, true);
  std::vector<Rotation3> rot;
  for (const auto& p : poses) rot.push_back(p.rotation);
  const TranslationSyncOutput out = translation_sync_detailed(g, rot);
  EXPECT_LT(translation_objective(g, rot, out.translations), 1e-12);
  EXPECT_EQ(out.translations[0], Vec3::Zero());
  EXPECT_EQ(out.rank_deficiency, 3);
}

TEST(TranslationSync, MatchesLeastSquaresOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto poses = random_poses(rng, 10);
    const PoseGraph g = graph_from(rng, poses, 0.05, 0.1, 0.5, true);
    const auto rot = rotation_sync(g);
    const auto ours = translation_sync(g, rot);
    const auto oracle = translation_oracle(g, rot);
    for (std::size_t k = 0; k < ours.size(); ++k) EXPECT_LT((ours[k] - oracle[k]).norm(), 1e-9);
  }
}

TEST(TranslationSync, ManyGraphSizesMatchOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5000; ++trial) {
    const int n = 3 + trial % 12;
    const auto poses = random_poses(rng, n);
    const PoseGraph g = graph_from(rng, poses, 0.05, 0.1, 0.5, true);
    const auto rot = rotation_sync(g);
    const auto ours = translation_sync(g, rot);
    const auto oracle = translation_oracle(g, rot);
    double worst = 0.0;
    for (std::size_t k = 0; k < ours.size(); ++k) worst = std::max(worst, (ours[k] - oracle[k]).norm());
    ASSERT_LT(worst, 1e-8) << "trial " << trial << ", n = " << n;
  }
}

TEST(TranslationSync, Stationarity) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto poses = random_poses(rng, 8);
    const PoseGraph g = graph_from(rng, poses, 0.05, 0.1, 0.6, true);
    const auto rot = rotation_sync(g);
    const auto t = translation_sync(g, rot);
    const double f0 = translation_objective(g, rot, t);
    double scale = 0.0;
    for (const Edge& e : g.edges()) scale += e.c_fused * e.motion.translation.squaredNorm();
    // Central differences; the objective is quadratic so they are exact up to rounding.
    const double h = 1e-4;
    double grad2 = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      for (int d = 0; d < 3; ++d) {
        auto plus = t, minus = t;
        plus[k][d] += h;
        minus[k][d] -= h;
        const double df = (translation_objective(g, rot, plus) - translation_objective(g, rot, minus)) / (2 * h);
        grad2 += df * df;
      }
    EXPECT_LT(std::sqrt(grad2), 1e-6 * std::max(scale, 1.0));
    for (int p = 0; p < 20; ++p) {
      auto moved = t;
      for (auto& v : moved) v += 1e-3 * Vec3(gauss(rng), gauss(rng), gauss(rng));
      EXPECT_GE(translation_objective(g, rot, moved), f0);
    }
  }
}

TEST(TransfSync, NoiseFreeFixedPoint) {
  std::mt19937_64 rng(9);
  const auto poses = random_poses(rng, 7);
  const PoseGraph g = graph_from(rng, poses, 0.0, 0.0);
  const SyncOutcome one = transf_sync(g, 1);
  const SyncOutcome four = transf_sync(g, 4);
  EXPECT_EQ(four.result.rounds_completed, 4);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    EXPECT_LT((one.result.absolute[k].matrix() - four.result.absolute[k].matrix()).norm(), 1e-9);
    const RigidMotion expected = relative_from_absolute(poses[k], poses[0]);
    EXPECT_LT((four.result.absolute[k].matrix() - expected.matrix()).norm(), 1e-9);
  }
  EXPECT_EQ(four.result.absolute[0].matrix(), Mat4::Identity());
}

TEST(TransfSync, OneRoundIsPlainSync) {
  std::mt19937_64 rng(10);
  const auto poses = random_poses(rng, 9);
  const PoseGraph g = graph_from(rng, poses, 0.05, 0.05, 0.7, true);
  const SyncOutcome out = transf_sync(g, 1);
  const auto rot = rotation_sync(g);
  const auto t = translation_sync(g, rot);
  for (std::size_t k = 0; k < rot.size(); ++k) {
    EXPECT_EQ(out.result.absolute[k].rotation.matrix(), rot[k].matrix());
    EXPECT_EQ(out.result.absolute[k].translation, t[k]);
  }
}

TEST(TransfSync, OutlierEdgesGetLowerGlobalConfidence) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto poses = random_poses(rng, 10);
    std::vector<Edge> edges = graph_from(rng, poses, deg2rad(0.5), 0.005).edges();
    std::vector<bool> outlier(edges.size(), false);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (u(rng) < 0.2) {
        edges[k].motion = random_motion(rng);
        outlier[k] = true;
      }
    }
    const SyncOutcome out = transf_sync(PoseGraph(10, edges), 4);
    std::vector<double> in_c, out_c;
    for (std::size_t k = 0; k < edges.size(); ++k) (outlier[k] ? out_c : in_c).push_back(out.graph.edges()[k].c_global);
    if (out_c.empty()) continue;
    auto med = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    EXPECT_LT(med(out_c), med(in_c));
  }
}

// Relabels nodes by k ↦ (k + shift) mod n, flipping edges that change orientation.
PoseGraph relabel(const PoseGraph& g, int shift, std::vector<int>& label) {
  const int n = g.node_count();
  label.assign(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < n; ++k) label[static_cast<std::size_t>(k)] = (k + shift) % n;
  std::vector<Edge> out;
  for (Edge e : g.edges()) {
    int a = label[static_cast<std::size_t>(e.i)], b = label[static_cast<std::size_t>(e.j)];
    if (a > b) {
      std::swap(a, b);
      e.motion = invert(e.motion);
    }
    e.i = a;
    e.j = b;
    out.push_back(e);
  }
  return PoseGraph(n, out);
}

TEST(RotationSync, AnchorChoiceDoesNotChangeRelatives) {
  std::mt19937_64 rng(12);
  const int n = 8;
  const PoseGraph g = graph_from(rng, random_poses(rng, n), 0.05, 0.05, 0.8, true);
  std::vector<int> label;
  const auto first = rotation_sync(g);
  const auto second = rotation_sync(relabel(g, 3, label));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto li = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
      const auto lj = static_cast<std::size_t>(label[static_cast<std::size_t>(j)]);
      const Mat3 a = first[static_cast<std::size_t>(j)].matrix().transpose() * first[static_cast<std::size_t>(i)].matrix();
      const Mat3 b = second[lj].matrix().transpose() * second[li].matrix();
      EXPECT_LT((a - b).norm(), 1e-9);
    }
}

TEST(TransfSync, AnchorChoiceWithConsistentRotations) {
  std::mt19937_64 rng(13);
  const int n = 8;
  const PoseGraph g = graph_from(rng, random_poses(rng, n), 0.0, 0.05, 0.8, true);
  std::vector<int> label;
  const auto first = transf_sync(g, 1).result.absolute;
  const auto second = transf_sync(relabel(g, 5, label), 1).result.absolute;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const RigidMotion a = relative_from_absolute(first[static_cast<std::size_t>(i)], first[static_cast<std::size_t>(j)]);
      const RigidMotion b = relative_from_absolute(second[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])],
                                                   second[static_cast<std::size_t>(label[static_cast<std::size_t>(j)])]);
      EXPECT_LT((a.matrix() - b.matrix()).norm(), 1e-9);
    }
}

TEST(TransfSync, Errors) {
  std::mt19937_64 rng(14);
  const PoseGraph g = graph_from(rng, random_poses(rng, 4), 0.0, 0.0);
  EXPECT_EQ(code_of([&] { transf_sync(g, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { translation_sync(g, std::vector<Rotation3>(3)); }), ErrorCode::LengthMismatch);
}

}  // namespace
}  // namespace mvreg
